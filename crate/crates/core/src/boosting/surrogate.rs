use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::funcspace::{gaussian_expectation, fw_step, ConvexCombination, FunctionHandle, Method};
use crate::learners::BaseLearner;
use crate::sq_oracle::{ResidualAccess, SqAccess};

use super::loss::{surrogate_gap, surrogate_gap_to_l2};

#[derive(Debug, Clone, PartialEq)]
pub struct FwConfig {
    /// Number of iterations `T`; the base learner runs `T + 1` times.
    pub iterations: usize,
    pub delta: f64,
    pub alpha: f64,
    /// Diameter of the ball holding the class.
    pub diameter: f64,
}

impl FwConfig {
    pub fn new(iterations: usize, diameter: f64) -> Self {
        Self {
            iterations,
            delta: 1.0,
            alpha: 1.0,
            diameter,
        }
    }

    pub fn gamma(&self, t: usize) -> f64 {
        (2.0 / (self.alpha * (t as f64 + 2.0))).min(1.0)
    }

    /// `C_p = beta * diam^2`.
    pub fn curvature(&self, beta: f64) -> f64 {
        beta * self.diameter * self.diameter
    }

    /// Gap allowed at iterate `t`: `2 C_p (1 + delta) / (alpha^2 (t + 2))`.
    pub fn gap_bound(&self, beta: f64, t: usize) -> f64 {
        2.0 * self.curvature(beta) * (1.0 + self.delta) / (self.alpha * self.alpha * (t as f64 + 2.0))
    }

    /// Slack granted to the base learner at step `t`: `delta gamma_t C_p / 2`.
    pub fn subproblem_slack(&self, beta: f64, t: usize) -> f64 {
        0.5 * self.delta * self.gamma(t) * self.curvature(beta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FwRecord {
    /// Index of the iterate this row describes.
    pub t: usize,
    /// Step taken to reach it.
    pub gamma: f64,
    pub subproblem_epsilon: f64,
    pub subproblem_correlation: f64,
    pub atom_id: Option<usize>,
    pub gap_bound: f64,
    pub observation: Option<Observation>,
}

/// What a monitor with knowledge of the target measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub gap: f64,
    pub gap_std_error: f64,
    pub l2_to_target: f64,
    pub l2_std_error: f64,
    pub l2_bound: f64,
}

#[derive(Debug, Clone)]
pub struct FwTrace {
    pub records: Vec<FwRecord>,
    pub iterate: ConvexCombination,
    pub base_calls: usize,
    pub queries_issued: usize,
}

impl FwTrace {
    pub fn final_observation(&self) -> Option<Observation> {
        self.records.last().and_then(|r| r.observation)
    }
}

/// Sees each iterate; used by tests and experiments, never by the algorithm.
pub trait IterateMonitor {
    fn observe(&mut self, t: usize, iterate: &ConvexCombination) -> Result<Observation>;
}

/// Measures surrogate gaps and L2 distances against a known target.
pub struct GapMonitor {
    target: FunctionHandle,
    psi: Activation,
    method: Method,
}

impl GapMonitor {
    pub fn new(target: FunctionHandle, psi: Activation, method: Method) -> Self {
        Self { target, psi, method }
    }
}

impl IterateMonitor for GapMonitor {
    fn observe(&mut self, _t: usize, iterate: &ConvexCombination) -> Result<Observation> {
        let f = iterate.to_handle();
        let gap = surrogate_gap(&f, &self.target, &self.psi, &self.method)?;
        let hints = f.hints().combine(&self.target.hints());
        let sq = gaussian_expectation(
            f.arity(),
            &hints,
            &|x| (self.psi.eval(f.eval(x)) - self.psi.eval(self.target.eval(x))).powi(2),
            &self.method,
        )?;
        let l2 = sq.value.max(0.0).sqrt();
        let l2_err = if l2 > 0.0 { sq.std_error / (2.0 * l2) } else { sq.std_error.sqrt() };
        Ok(Observation {
            gap: gap.value,
            gap_std_error: gap.std_error,
            l2_to_target: l2,
            l2_std_error: l2_err,
            l2_bound: surrogate_gap_to_l2(gap.value, self.psi.lipschitz()).bound,
        })
    }
}

/// Frank-Wolfe on the surrogate loss. Labels are reached only through
/// `access`: each step asks the base learner about the residual labels
/// `y - psi(f_t(x))`, whose best correlate is the descent direction.
pub fn run_fw_surrogate(
    access: &dyn SqAccess,
    learner: &dyn BaseLearner,
    psi: &Activation,
    config: &FwConfig,
    mut monitor: Option<&mut dyn IterateMonitor>,
) -> Result<FwTrace> {
    let lambda = psi.lipschitz();
    if !lambda.is_finite() {
        return Err(Error::Contract(format!("outer activation {psi} must be Lipschitz")));
    }
    let n = access.dimension();
    let mut iterate: Option<ConvexCombination> = None;
    let mut records = Vec::with_capacity(config.iterations + 1);
    let mut queries_issued = 0;
    for t in 0..=config.iterations {
        let gamma = config.gamma(t);
        let epsilon = config.subproblem_slack(lambda, t);
        let current = iterate.as_ref().map_or_else(|| FunctionHandle::zero(n), |c| c.to_handle());
        let residual = ResidualAccess::new(access, current, psi.clone());
        let out = learner.learn(&residual, epsilon).map_err(|e| Error::Iteration {
            iteration: t,
            source: Box::new(e),
        })?;
        queries_issued += out.queries_used;
        let next = match &iterate {
            None => ConvexCombination::single(out.hypothesis.clone()),
            Some(c) => fw_step(c, out.hypothesis.clone(), gamma)?.compact(),
        };
        let observation = match monitor.as_deref_mut() {
            Some(m) => Some(m.observe(t + 1, &next)?),
            None => None,
        };
        records.push(FwRecord {
            t: t + 1,
            gamma,
            subproblem_epsilon: epsilon,
            subproblem_correlation: out.achieved_correlation,
            atom_id: out.atom,
            gap_bound: config.gap_bound(lambda, t + 1),
            observation,
        });
        iterate = Some(next);
    }
    Ok(FwTrace {
        records,
        iterate: iterate.expect("at least one step"),
        base_calls: config.iterations + 1,
        queries_issued,
    })
}
