//! Base learners answering correlation subproblems through statistical queries.

mod grid;
mod lowdeg;
mod reductions;

pub use grid::{idealized_grid_learn, query_scale, ridge_grid, signed_ridge_grid, GridLearner};
pub use lowdeg::{degree_scaling, rescaling_bound, BaseLearnerSpec, HypothesisClass, LearnerMode, LowDegreeLearner, LowDegreeReport};
pub use reductions::{
    boolean_zero_one_adapter, correlation_from_square_loss, square_loss_grid, ProjectionReport, SquareLossConstants,
};

use crate::error::Result;
use crate::funcspace::FunctionHandle;
use crate::sq_oracle::SqAccess;

#[derive(Debug, Clone)]
pub struct LearnerOutput {
    pub hypothesis: FunctionHandle,
    /// The learner's own estimate of `E[h(x) y]`.
    pub achieved_correlation: f64,
    pub std_error: f64,
    pub queries_used: usize,
    /// Accuracy demanded of each estimated expectation.
    pub tau_used: f64,
    /// Index into the candidate list, for grid learners.
    pub atom: Option<usize>,
    pub low_degree: Option<LowDegreeReport>,
}

/// Returns `h` in the ball of radius [`BaseLearner::radius`] whose
/// correlation with the labels is within `epsilon` of the best in its class.
pub trait BaseLearner: Sync {
    fn learn(&self, access: &dyn SqAccess, epsilon: f64) -> Result<LearnerOutput>;
    fn radius(&self) -> f64;
    fn name(&self) -> String;
    /// Queries issued by every call, when fixed in advance.
    fn queries_per_call(&self) -> Option<usize> {
        None
    }
}
