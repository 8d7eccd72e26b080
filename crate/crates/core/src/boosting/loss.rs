use crate::activation::Activation;
use crate::error::Result;
use crate::funcspace::{gaussian_expectation, Estimate, FunctionHandle, Method};
use crate::quadrature::gauss_legendre;
use crate::sq_oracle::LabeledDistribution;

#[derive(Debug, Clone, PartialEq)]
pub enum LossKind {
    Squared,
    Surrogate(Activation),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec {
    pub kind: LossKind,
}

impl LossSpec {
    pub fn squared() -> Self {
        Self { kind: LossKind::Squared }
    }

    pub fn surrogate(psi: Activation) -> Self {
        Self {
            kind: LossKind::Surrogate(psi),
        }
    }

    /// Smoothness constant: 2 for the squared loss, `Lip(psi)` otherwise.
    pub fn smoothness(&self) -> f64 {
        match &self.kind {
            LossKind::Squared => 2.0,
            LossKind::Surrogate(psi) => psi.lipschitz(),
        }
    }

    pub fn value(&self, f: &FunctionHandle, dist: &LabeledDistribution, method: &Method) -> Result<Estimate> {
        match &self.kind {
            LossKind::Squared => squared_loss(f, dist, method),
            LossKind::Surrogate(psi) => surrogate_loss(f, dist, psi, method),
        }
    }
}

/// `Psi(a) = int_0^a psi`, by Gauss-Legendre panels when no closed form exists.
pub fn psi_antiderivative(psi: &Activation, a: f64) -> f64 {
    if let Some(v) = psi.antiderivative(a) {
        return v;
    }
    let (lo, hi) = (a.min(0.0), a.max(0.0));
    let mut edges = vec![lo, hi];
    edges.extend(psi.breakpoints().into_iter().filter(|b| *b > lo && *b < hi));
    edges.sort_by(f64::total_cmp);
    let rule = gauss_legendre(24);
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        total += half * rule.integrate(|t| psi.eval(mid + half * t));
    }
    if a < 0.0 {
        -total
    } else {
        total
    }
}

/// `E[Psi(f(x)) - y f(x)]`.
pub fn surrogate_loss(f: &FunctionHandle, dist: &LabeledDistribution, psi: &Activation, method: &Method) -> Result<Estimate> {
    dist.expectation(
        &|x, y| {
            let v = f.eval(x);
            psi_antiderivative(psi, v) - y * v
        },
        &f.hints(),
        method,
    )
}

/// `E[(f(x) - y)^2]`.
pub fn squared_loss(f: &FunctionHandle, dist: &LabeledDistribution, method: &Method) -> Result<Estimate> {
    dist.expectation(&|x, y| (f.eval(x) - y).powi(2), &f.hints(), method)
}

/// `psi o f - psi o f_star`.
pub fn surrogate_gradient(f: &FunctionHandle, f_star: &FunctionHandle, psi: &Activation) -> Result<FunctionHandle> {
    FunctionHandle::sum(vec![
        FunctionHandle::composed(psi.clone(), f.clone()),
        FunctionHandle::scaled(-1.0, FunctionHandle::composed(psi.clone(), f_star.clone())),
    ])
}

/// `L_sur(f) - L_sur(f_star)` for labels with mean `psi o f_star`, as the
/// pointwise Bregman divergence `Psi(f) - Psi(f*) - psi(f*)(f - f*)`.
pub fn surrogate_gap(f: &FunctionHandle, f_star: &FunctionHandle, psi: &Activation, method: &Method) -> Result<Estimate> {
    let hints = f.hints().combine(&f_star.hints());
    gaussian_expectation(
        f.arity(),
        &hints,
        &|x| {
            let (a, b) = (f.eval(x), f_star.eval(x));
            psi_antiderivative(psi, a) - psi_antiderivative(psi, b) - psi.eval(b) * (a - b)
        },
        method,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Conversion {
    pub bound: f64,
    /// Set when a negative gap, from estimation noise, was clamped to zero.
    pub clamped: bool,
}

/// `sqrt(2 lambda gap)`: the L2 distance `||psi o f - psi o f*||` allowed
/// by a surrogate gap.
pub fn surrogate_gap_to_l2(gap: f64, lambda: f64) -> L2Conversion {
    L2Conversion {
        bound: (2.0 * lambda * gap.max(0.0)).sqrt(),
        clamped: gap < 0.0,
    }
}
