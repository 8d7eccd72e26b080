use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::funcspace::{inner_product, norm, FunctionHandle, Method, Structure};
use crate::sq_oracle::{LabeledDistribution, SqAccess, StatQuery};

use super::{BaseLearner, LearnerOutput};

/// Queries are clipped beyond this many standard deviations along any
/// direction a function depends on.
const CLIP_RADIUS: f64 = 6.0;

fn sup_on_interval(act: &Activation, r: f64) -> f64 {
    if let Some(s) = act.sup_norm() {
        return s;
    }
    (0..=256)
        .map(|k| act.eval(-r + 2.0 * r * k as f64 / 256.0).abs())
        .fold(0.0, f64::max)
}

/// A bound on `|h|` over the region where each ridge argument stays within
/// six standard deviations; `None` for opaque functions.
pub fn query_scale(h: &FunctionHandle) -> Option<f64> {
    match h.structure() {
        Structure::Constant(c) => Some(c.abs()),
        Structure::Ridge { activation, weight } => {
            let w = weight.iter().map(|v| v * v).sum::<f64>().sqrt();
            Some(sup_on_interval(activation, CLIP_RADIUS * w))
        }
        Structure::Scaled { factor, inner } => query_scale(inner).map(|s| s * factor.abs()),
        Structure::Sum(terms) => terms.iter().map(query_scale).sum(),
        Structure::Composed { outer, inner } => match outer.sup_norm() {
            Some(s) => Some(s),
            None => query_scale(inner).map(|b| sup_on_interval(outer, b)),
        },
        Structure::Polynomial(p) => {
            let max_deg = p.terms().iter().flat_map(|(i, _)| i.iter().copied()).max().unwrap_or(0);
            let m = crate::hermite::hermite_sup_on(max_deg as usize, CLIP_RADIUS);
            Some(
                p.terms()
                    .iter()
                    .map(|(i, c)| c.abs() * i.iter().map(|&a| m[a as usize]).product::<f64>())
                    .sum(),
            )
        }
        Structure::Opaque { .. } => None,
    }
    .map(|s| s.max(f64::MIN_POSITIVE))
}

/// `scale * act(<cos t e0 + sin t e1, x>)` for `count` equally spaced `t`.
pub fn ridge_grid(activation: &Activation, count: usize, plane: &[Vec<f64>; 2], scale: f64) -> Vec<FunctionHandle> {
    (0..count)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            let w = plane[0].iter().zip(&plane[1]).map(|(a, b)| t.cos() * a + t.sin() * b).collect();
            FunctionHandle::scaled(scale, FunctionHandle::ridge(activation.clone(), w))
        })
        .collect()
}

/// [`ridge_grid`] with `count / 2` directions, each with both signs.
pub fn signed_ridge_grid(activation: &Activation, count: usize, plane: &[Vec<f64>; 2], scale: f64) -> Vec<FunctionHandle> {
    ridge_grid(activation, count / 2, plane, scale)
        .into_iter()
        .flat_map(|h| [h.clone(), FunctionHandle::scaled(-1.0, h)])
        .collect()
}

/// Grid search over a fixed candidate list, one correlation query each.
#[derive(Debug, Clone)]
pub struct GridLearner {
    candidates: Vec<FunctionHandle>,
    scales: Vec<f64>,
    radius: f64,
}

impl GridLearner {
    pub fn new(candidates: Vec<FunctionHandle>, radius: f64) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::Contract("grid learner needs at least one candidate".into()));
        }
        let mut scales = Vec::with_capacity(candidates.len());
        for (i, h) in candidates.iter().enumerate() {
            let nrm = norm(h, &Method::Auto)?.value;
            if nrm > radius + 1e-9 {
                return Err(Error::Contract(format!("candidate {i} has norm {nrm} > radius {radius}")));
            }
            scales.push(query_scale(h).ok_or_else(|| {
                Error::Unsupported(format!("candidate {i} has no value bound for query scaling"))
            })?);
        }
        Ok(Self {
            candidates,
            scales,
            radius,
        })
    }

    pub fn candidates(&self) -> &[FunctionHandle] {
        &self.candidates
    }
}

impl BaseLearner for GridLearner {
    fn learn(&self, access: &dyn SqAccess, epsilon: f64) -> Result<LearnerOutput> {
        let c = access.label_bound();
        if !c.is_finite() {
            return Err(Error::Contract("grid learner needs bounded labels".into()));
        }
        let queries: Vec<StatQuery> = self
            .candidates
            .iter()
            .zip(&self.scales)
            .map(|(h, &b)| StatQuery::correlation(h.clone(), 1.0 / (b * c), epsilon / (10.0 * b * c)))
            .collect();
        let answers = access.query_batch(&queries)?;
        let (best, corr) = answers
            .iter()
            .zip(&self.scales)
            .map(|(a, b)| a * b * c)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        Ok(LearnerOutput {
            hypothesis: self.candidates[best].clone(),
            achieved_correlation: corr,
            std_error: 0.0,
            queries_used: queries.len(),
            tau_used: epsilon / 10.0,
            atom: Some(best),
            low_degree: None,
        })
    }

    fn radius(&self) -> f64 {
        self.radius
    }

    fn name(&self) -> String {
        format!("grid({})", self.candidates.len())
    }

    fn queries_per_call(&self) -> Option<usize> {
        Some(self.candidates.len())
    }
}

/// Benchmark learner with direct access to the conditional mean: the
/// candidate of largest correlation, computed without queries.
pub fn idealized_grid_learn(dist: &LabeledDistribution, candidates: &[FunctionHandle], epsilon: f64) -> Result<LearnerOutput> {
    if candidates.is_empty() {
        return Err(Error::Contract("idealized learner needs at least one candidate".into()));
    }
    let mut best: Option<(usize, crate::funcspace::Estimate)> = None;
    for (i, h) in candidates.iter().enumerate() {
        let e = inner_product(h, dist.conditional_mean(), &Method::Auto)?;
        if best.is_none_or(|(_, b)| e.value > b.value) {
            best = Some((i, e));
        }
    }
    let (i, e) = best.expect("nonempty");
    Ok(LearnerOutput {
        hypothesis: candidates[i].clone(),
        achieved_correlation: e.value,
        std_error: e.std_error,
        queries_used: 0,
        tau_used: epsilon,
        atom: Some(i),
        low_degree: None,
    })
}
