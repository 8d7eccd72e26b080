use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::funcspace::{
    gaussian_expectation, mc_scalar, standard_normal_vec, Estimate, FunctionHandle, Hints, McConfig, Method,
};

#[derive(Debug, Clone)]
pub enum LabelModel {
    /// `y = f(x)`.
    Deterministic,
    /// `y in {-1, +1}` with `E[y | x] = f(x)`.
    PConcept,
    /// `y = y_base - shift(x)`.
    Shifted {
        base: Box<LabeledDistribution>,
        shift: FunctionHandle,
    },
}

impl LabelModel {
    pub fn tag(&self) -> &'static str {
        match self {
            LabelModel::Deterministic => "deterministic",
            LabelModel::PConcept => "pconcept",
            LabelModel::Shifted { .. } => "shifted",
        }
    }
}

/// A distribution over `(x, y)` with `x ~ N(0, I_n)`.
#[derive(Debug, Clone)]
pub struct LabeledDistribution {
    dimension: usize,
    conditional_mean: FunctionHandle,
    model: LabelModel,
    label_bound: f64,
}

const RANGE_CHECK_POINTS: usize = 100_000;

impl LabeledDistribution {
    /// Labels equal to `f(x)`; `label_bound` must dominate `|f|`, which is
    /// checked on seeded Gaussian points.
    pub fn deterministic(f: FunctionHandle, label_bound: f64) -> Result<Self> {
        if !(label_bound > 0.0) {
            return Err(Error::Contract("label bound must be positive".into()));
        }
        check_range(&f, label_bound)?;
        Ok(Self {
            dimension: f.arity(),
            conditional_mean: f,
            model: LabelModel::Deterministic,
            label_bound,
        })
    }

    /// A p-concept. The range of `f` is checked on seeded Gaussian points.
    pub fn pconcept(f: FunctionHandle) -> Result<Self> {
        check_range(&f, 1.0)?;
        Ok(Self {
            dimension: f.arity(),
            conditional_mean: f,
            model: LabelModel::PConcept,
            label_bound: 1.0,
        })
    }

    /// Labels `y - shift(x)`; `shift_bound` must dominate `|shift|`.
    pub fn shifted(base: LabeledDistribution, shift: FunctionHandle, shift_bound: f64) -> Result<Self> {
        if shift.arity() != base.dimension {
            return Err(Error::Arity {
                expected: base.dimension,
                got: shift.arity(),
            });
        }
        let cmf = FunctionHandle::sum(vec![
            base.conditional_mean.clone(),
            FunctionHandle::scaled(-1.0, shift.clone()),
        ])?;
        Ok(Self {
            dimension: base.dimension,
            conditional_mean: cmf,
            label_bound: base.label_bound + shift_bound,
            model: LabelModel::Shifted {
                base: Box::new(base),
                shift,
            },
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn conditional_mean(&self) -> &FunctionHandle {
        &self.conditional_mean
    }

    pub fn label_bound(&self) -> f64 {
        self.label_bound
    }

    pub fn model(&self) -> &LabelModel {
        &self.model
    }

    /// Structure of `x -> E[. | x]`.
    pub fn hints(&self) -> Hints {
        self.conditional_mean.hints()
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
        let x = standard_normal_vec(rng, self.dimension);
        let y = self.sample_label(&x, rng);
        (x, y)
    }

    pub fn sample_label(&self, x: &[f64], rng: &mut ChaCha8Rng) -> f64 {
        match &self.model {
            LabelModel::Deterministic => self.conditional_mean.eval(x),
            LabelModel::PConcept => {
                let p = 0.5 * (1.0 + self.conditional_mean.eval(x));
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    -1.0
                }
            }
            LabelModel::Shifted { base, shift } => base.sample_label(x, rng) - shift.eval(x),
        }
    }

    /// `E[phi(x, y) | x]`.
    pub fn conditional_expectation(&self, phi: &dyn Fn(&[f64], f64) -> f64, x: &[f64]) -> f64 {
        match &self.model {
            LabelModel::Deterministic => phi(x, self.conditional_mean.eval(x)),
            LabelModel::PConcept => {
                let p = 0.5 * (1.0 + self.conditional_mean.eval(x));
                p * phi(x, 1.0) + (1.0 - p) * phi(x, -1.0)
            }
            LabelModel::Shifted { base, shift } => {
                let s = shift.eval(x);
                base.conditional_expectation(&|x, y| phi(x, y - s), x)
            }
        }
    }

    /// `E[phi(x, y)]`. Quadrature integrates the label analytically; Monte
    /// Carlo samples `(x, y)` pairs.
    pub fn expectation(
        &self,
        phi: &(dyn Fn(&[f64], f64) -> f64 + Sync),
        phi_hints: &Hints,
        method: &Method,
    ) -> Result<Estimate> {
        match method {
            Method::MonteCarlo(cfg) => Ok(self.expectation_mc(phi, cfg)),
            _ => {
                let hints = self.hints().combine(phi_hints);
                gaussian_expectation(
                    self.dimension,
                    &hints,
                    &|x| self.conditional_expectation(phi, x),
                    method,
                )
            }
        }
    }

    pub fn expectation_mc(&self, phi: &(dyn Fn(&[f64], f64) -> f64 + Sync), cfg: &McConfig) -> Estimate {
        mc_scalar(cfg, |rng| {
            let (x, y) = self.sample(rng);
            phi(&x, y)
        })
    }
}

fn check_range(f: &FunctionHandle, bound: f64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    for _ in 0..RANGE_CHECK_POINTS {
        let x = standard_normal_vec(&mut rng, f.arity());
        let v = f.eval(&x);
        if !(v.abs() <= bound * (1.0 + 1e-12)) {
            return Err(Error::Contract(format!("|f| = {} exceeds the label bound {bound}", v.abs())));
        }
    }
    Ok(())
}

/// The p-concept over `{-1, +1}` labels whose mean is `f_cmf / C`.
pub fn simulate_boolean_from_real(dist: &LabeledDistribution) -> Result<LabeledDistribution> {
    let c = dist.label_bound();
    if !(c > 0.0) {
        return Err(Error::Contract("label bound must be positive".into()));
    }
    LabeledDistribution::pconcept(FunctionHandle::scaled(1.0 / c, dist.conditional_mean().clone()))
}
