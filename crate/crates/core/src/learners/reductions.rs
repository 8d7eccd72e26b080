use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::funcspace::{inner_product, norm, FunctionHandle, Method};
use crate::sq_oracle::{BooleanAccess, SqAccess};

use super::grid::ridge_grid;
use super::{BaseLearner, LearnerOutput};

/// Constants for turning a square-loss learner into a correlation learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareLossConstants {
    pub epsilon: f64,
    /// Square-loss accuracy demanded, `eps^3 / 8`.
    pub eps_prime: f64,
    /// Norm threshold below which zero is returned, `eps^2 / 4`.
    pub eta: f64,
}

impl SquareLossConstants {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            eps_prime: epsilon.powi(3) / 8.0,
            eta: epsilon * epsilon / 4.0,
        }
    }

    /// `eps' / (2 eta) <= eps` and `sqrt(eps' + 2 C eta) <= eps sqrt(C)`.
    pub fn chain_holds(&self, c: f64) -> bool {
        self.eps_prime / (2.0 * self.eta) <= self.epsilon
            && (self.eps_prime + 2.0 * c * self.eta).sqrt() <= self.epsilon * c.sqrt()
    }
}

/// Zero when `||h|| <= eps^2 / 4`, else `h / ||h||`.
pub fn correlation_from_square_loss(h: &FunctionHandle, epsilon: f64) -> Result<FunctionHandle> {
    let k = SquareLossConstants::new(epsilon);
    let nrm = norm(h, &Method::Auto)?.value;
    if nrm <= k.eta {
        return Ok(FunctionHandle::zero(h.arity()));
    }
    Ok(FunctionHandle::scaled(1.0 / nrm, h.clone()))
}

/// The square-loss minimizer over `{ +-sqrt(2) relu(<u, x>) : ||u|| <= 1 }`
/// restricted to a grid of directions.
#[derive(Debug, Clone)]
pub struct ProjectionReport {
    pub h_sq: FunctionHandle,
    /// `||h_sq||`.
    pub norm: f64,
    pub direction: usize,
    pub sign: f64,
    /// `<h_sq / ||h_sq||, f>`.
    pub correlation: f64,
}

pub fn square_loss_grid(target: &FunctionHandle, count: usize, plane: &[Vec<f64>; 2]) -> Result<ProjectionReport> {
    let units = ridge_grid(&Activation::Relu, count, plane, 2f64.sqrt());
    let mut best: Option<(f64, ProjectionReport)> = None;
    for (k, g) in units.iter().enumerate() {
        let c = inner_product(g, target, &Method::Auto)?.value;
        let sign = if c < 0.0 { -1.0 } else { 1.0 };
        let t = c.abs().min(1.0);
        let gain = t * (2.0 * c.abs() - t);
        if best.as_ref().is_none_or(|(b, _)| gain > *b) {
            best = Some((
                gain,
                ProjectionReport {
                    h_sq: FunctionHandle::scaled(sign * t, g.clone()),
                    norm: t,
                    direction: k,
                    sign,
                    correlation: c.abs(),
                },
            ));
        }
    }
    best.map(|(_, r)| r)
        .ok_or_else(|| Error::Contract("empty direction grid".into()))
}

/// Runs a learner for Boolean labels on the p-concept simulated from
/// real-labeled access; correlations are reported on the original scale.
pub fn boolean_zero_one_adapter(learner: &dyn BaseLearner, access: &dyn SqAccess, epsilon: f64) -> Result<LearnerOutput> {
    let c = access.label_bound();
    let boolean = BooleanAccess::new(access)?;
    let mut out = learner.learn(&boolean, epsilon / c)?;
    out.achieved_correlation *= c;
    out.std_error *= c;
    out.queries_used *= 2;
    Ok(out)
}
