//! Simulated statistical-query access over Gaussian-marginal distributions.

mod distribution;
mod oracle;
mod query;

pub use distribution::{simulate_boolean_from_real, LabelModel, LabeledDistribution};
pub use oracle::{
    answer_query, evaluate_query, implied_sample_complexity, AdversaryMode, BooleanAccess, Estimation,
    LedgerEntry, OracleAnswer, OracleConfig, QueryLedger, ResidualAccess, SqAccess, StatOracle,
};
pub use query::{rewrite_query_for_residual, QueryFn, StatQuery};
