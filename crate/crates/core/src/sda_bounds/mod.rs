//! Statistical dimension, correlation structure of finite classes, and the
//! arithmetic of query lower bounds.

mod class;
mod regime;
mod sda;

pub use class::{average_correlation, binomial, monomial_class, monomial_norm_lower_bound, FiniteClass, GramMethod, MONOMIAL_CLASS_CAP};
pub use regime::{lower_bound_calculator, regime_check, Constraint, DecayFn, Family, LowerBound, RegimeParams, RegimeReport};
pub use sda::{sda_exact, sda_from_profile, sda_greedy_lower, SdaResult, EXACT_LIMIT};
