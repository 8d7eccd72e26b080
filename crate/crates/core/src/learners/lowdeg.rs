use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::funcspace::{enumerate_multi_indices, FunctionHandle, HermitePolynomial, MultiIndexSet};
use crate::hermite::{approximate_degree, hermite_sup_on};
use crate::sq_oracle::{SqAccess, StatQuery};

use super::grid::GridLearner;
use super::{BaseLearner, LearnerOutput};

const CLIP_RADIUS: f64 = 6.0;
const MAX_SEARCH_DEGREE: usize = 400;

#[derive(Debug, Clone)]
pub enum HypothesisClass {
    ReluUnits,
    SigmoidUnits,
    Halfspaces,
    Monomials(u32),
    ExplicitFiniteList(Vec<FunctionHandle>),
}

impl HypothesisClass {
    /// Degree of a polynomial within `delta` of every unit-weight member.
    pub fn approximate_degree(&self, delta: f64) -> Result<u32> {
        let act = match self {
            HypothesisClass::ReluUnits => Activation::Relu,
            HypothesisClass::SigmoidUnits => Activation::Sigmoid,
            HypothesisClass::Halfspaces => Activation::Sign,
            HypothesisClass::Monomials(d) => return Ok(*d),
            HypothesisClass::ExplicitFiniteList(_) => {
                return Err(Error::Unsupported("no approximate degree for an explicit list".into()))
            }
        };
        Ok(approximate_degree(&act, delta, MAX_SEARCH_DEGREE)? as u32)
    }
}

/// Least-squares slope of `ln d(delta)` against `ln(1/delta)`.
pub fn degree_scaling(class: &HypothesisClass, deltas: &[f64]) -> Result<(Vec<u32>, f64)> {
    let degrees = deltas.iter().map(|&d| class.approximate_degree(d)).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = deltas.iter().map(|d| (1.0 / d).ln()).collect();
    let ys: Vec<f64> = degrees.iter().map(|&d| (d.max(1) as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Range("need at least two distinct deltas".into()));
    }
    Ok((degrees, sxy / sxx))
}

#[derive(Debug, Clone)]
pub enum LearnerMode {
    LowDegree { degree: Option<u32>, tau_floor: f64 },
    IdealizedGrid { candidates: Vec<FunctionHandle> },
}

#[derive(Debug, Clone)]
pub struct BaseLearnerSpec {
    pub class: HypothesisClass,
    pub diameter: f64,
    pub mode: LearnerMode,
}

impl BaseLearnerSpec {
    pub fn radius(&self) -> f64 {
        self.diameter / 2.0
    }

    pub fn build(&self) -> Result<Box<dyn BaseLearner>> {
        match &self.mode {
            LearnerMode::LowDegree { degree, tau_floor } => Ok(Box::new(LowDegreeLearner {
                class: self.class.clone(),
                radius: self.radius(),
                degree: *degree,
                tau_floor: *tau_floor,
            })),
            LearnerMode::IdealizedGrid { candidates } => {
                Ok(Box::new(GridLearner::new(candidates.clone(), self.radius())?))
            }
        }
    }
}

/// Diagnostics of one low-degree run.
#[derive(Debug, Clone)]
pub struct LowDegreeReport {
    pub degree: u32,
    pub delta: f64,
    pub indices: MultiIndexSet,
    /// Estimated Hermite coefficients of the conditional mean.
    pub coefficients: Vec<f64>,
    /// `||f~||` before rescaling.
    pub estimate_norm: f64,
    /// True when the learner returned zero because no member can beat `epsilon`.
    pub gated: bool,
}

/// `4 R n^{d/2} tau / epsilon`, the distance allowed between the rescaled
/// estimate and the rescaled true truncation.
pub fn rescaling_bound(radius: f64, n: usize, degree: u32, tau: f64, epsilon: f64) -> f64 {
    4.0 * radius * (n as f64).powf(degree as f64 / 2.0) * tau / epsilon
}

/// Estimates all Hermite coefficients up to the approximate degree of the
/// class, then returns the estimate rescaled onto the sphere of radius `R`.
#[derive(Debug, Clone)]
pub struct LowDegreeLearner {
    pub class: HypothesisClass,
    pub radius: f64,
    /// Overrides the degree derived from the class.
    pub degree: Option<u32>,
    pub tau_floor: f64,
}

impl LowDegreeLearner {
    pub fn new(class: HypothesisClass, radius: f64) -> Self {
        Self {
            class,
            radius,
            degree: None,
            tau_floor: 1e-12,
        }
    }

    pub fn required_tau(&self, n: usize, degree: u32, c: f64, epsilon: f64) -> f64 {
        epsilon * epsilon / (8.0 * self.radius * c * (n as f64).powf(degree as f64 / 2.0))
    }
}

impl BaseLearner for LowDegreeLearner {
    fn learn(&self, access: &dyn SqAccess, epsilon: f64) -> Result<LearnerOutput> {
        let c = access.label_bound();
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Contract("low-degree learner needs a finite label bound".into()));
        }
        let n = access.dimension();
        let delta = epsilon / (2.0 * c);
        let degree = match self.degree {
            Some(d) => d,
            None => self.class.approximate_degree(delta)?,
        };
        let tau = self.required_tau(n, degree, c, epsilon);
        if tau < self.tau_floor {
            return Err(Error::Infeasible {
                required_tau: tau,
                floor: self.tau_floor,
            });
        }
        let indices = enumerate_multi_indices(n, degree);
        let sup = hermite_sup_on(degree as usize, CLIP_RADIUS);
        let scales: Vec<f64> = indices
            .indices
            .iter()
            .map(|i| i.iter().map(|&a| sup[a as usize]).product::<f64>())
            .collect();
        let queries: Vec<StatQuery> = indices
            .indices
            .iter()
            .zip(&scales)
            .map(|(i, &b)| {
                let basis = HermitePolynomial::basis(i.clone());
                let hints = basis.hints();
                StatQuery::new(tau / (b * c), move |x, y| basis.eval(x) * y / (b * c))
                    .with_hints(hints)
                    .with_label("hermite_coefficient")
            })
            .collect();
        let answers = access.query_batch(&queries)?;
        let coefficients: Vec<f64> = answers.iter().zip(&scales).map(|(a, b)| a * b * c).collect();
        let estimate_norm = coefficients.iter().map(|b| b * b).sum::<f64>().sqrt();
        let gated = self.radius * estimate_norm + c * delta <= epsilon || estimate_norm == 0.0;
        let (hypothesis, achieved) = if gated {
            (FunctionHandle::zero(n), 0.0)
        } else {
            let scaled: Vec<f64> = coefficients.iter().map(|b| b * self.radius / estimate_norm).collect();
            let p = FunctionHandle::polynomial(HermitePolynomial::from_coefficients(&indices, &scaled));
            (p, self.radius * estimate_norm)
        };
        Ok(LearnerOutput {
            hypothesis,
            achieved_correlation: achieved,
            std_error: 0.0,
            queries_used: queries.len(),
            tau_used: tau,
            atom: None,
            low_degree: Some(LowDegreeReport {
                degree,
                delta,
                indices,
                coefficients,
                estimate_norm,
                gated,
            }),
        })
    }

    fn radius(&self) -> f64 {
        self.radius
    }

    fn name(&self) -> String {
        "lowdeg".into()
    }
}
