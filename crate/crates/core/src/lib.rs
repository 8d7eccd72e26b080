//! Boosting weak learners for p-concepts with statistical queries.
//!
//! The crate covers Hermite analysis of activations, the one-layer hard
//! instance family, a statistical-query oracle with adversarial answers,
//! Frank-Wolfe boosting over a surrogate loss, and statistical-dimension
//! bounds for correlational learning.

pub mod activation;
pub mod boosting;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod funcspace;
pub mod hard_instance;
pub mod hermite;
pub mod learners;
pub mod quadrature;
pub mod sda_bounds;
pub mod sq_oracle;

pub use activation::Activation;
pub use error::{Error, Result};
