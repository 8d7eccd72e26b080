//! Probabilists' Hermite polynomials, Hermite expansions of activations,
//! approximate degree, and truncation bounds.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::quadrature::{gauss_hermite, piecewise_gaussian, PiecewiseSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `H_a = He_a / sqrt(a!)`, orthonormal under N(0, 1).
    Normalized,
    /// `He_a`, leading coefficient one.
    Monic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermiteBasis {
    pub max_degree: usize,
    pub normalization: Normalization,
}

impl HermiteBasis {
    pub fn new(max_degree: usize, normalization: Normalization) -> Self {
        Self {
            max_degree,
            normalization,
        }
    }

    pub fn eval(&self, degree: usize, x: f64) -> Result<f64> {
        if degree > self.max_degree {
            return Err(Error::Range(format!(
                "degree {degree} exceeds basis maximum {}",
                self.max_degree
            )));
        }
        Ok(match self.normalization {
            Normalization::Normalized => hermite_normalized(degree, x),
            Normalization::Monic => hermite_monic(degree, x),
        })
    }

    /// Values of every basis polynomial up to `max_degree` at `x`.
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.max_degree + 1];
        match self.normalization {
            Normalization::Normalized => fill_normalized(x, &mut out),
            Normalization::Monic => {
                out[0] = 1.0;
                if self.max_degree >= 1 {
                    out[1] = x;
                }
                for a in 1..self.max_degree {
                    out[a + 1] = x * out[a] - a as f64 * out[a - 1];
                }
            }
        }
        out
    }
}

pub fn hermite_monic(a: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..a {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub fn hermite_normalized(a: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..a {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// Writes `H_0(x), ..., H_{len-1}(x)` into `out`.
pub fn fill_normalized(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = x;
    }
    for k in 1..out.len().saturating_sub(1) {
        out[k + 1] = (x * out[k] - (k as f64).sqrt() * out[k - 1]) / ((k + 1) as f64).sqrt();
    }
}

/// `max_{|t| <= r} |H_a(t)|` for `a = 0..=max_degree`, on a fine grid.
pub fn hermite_sup_on(max_degree: usize, r: f64) -> Vec<f64> {
    let mut best = vec![0.0f64; max_degree + 1];
    let mut row = vec![0.0; max_degree + 1];
    let steps = 4000;
    for k in 0..=steps {
        fill_normalized(-r + 2.0 * r * k as f64 / steps as f64, &mut row);
        best.iter_mut().zip(&row).for_each(|(b, v)| *b = b.max(v.abs()));
    }
    best
}

/// Exact Hermite coefficient `E[relu(z) H_a(z)]`.
pub fn relu_hermite_coefficient(a: usize) -> f64 {
    match a {
        0 => 1.0 / (2.0 * PI).sqrt(),
        1 => 0.5,
        _ if a % 2 == 1 => 0.0,
        _ => {
            let b = a / 2;
            let bf = b as f64;
            let log_mag = 0.5 * ln_gamma(2.0 * bf + 1.0) - ln_gamma(bf + 1.0) - bf * std::f64::consts::LN_2;
            let sign = if b % 2 == 1 { 1.0 } else { -1.0 };
            sign * log_mag.exp() / ((2.0 * PI).sqrt() * (2.0 * bf - 1.0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientSource {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone)]
pub struct HermiteCoefficients {
    pub activation: Activation,
    pub coeffs: Vec<f64>,
    pub sources: Vec<CoefficientSource>,
    /// Nodes in the final quadrature rule, zero for closed forms.
    pub nodes_used: usize,
}

impl HermiteCoefficients {
    pub fn max_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }
}

const AGREEMENT: f64 = 1e-10;
const MAX_NODES: usize = 1 << 14;

fn check_integrable(activation: &Activation) -> Result<()> {
    if activation.growth_degree().is_none() {
        return Err(Error::Unsupported(format!(
            "activation {activation} has no declared polynomial growth bound"
        )));
    }
    Ok(())
}

/// Hermite coefficients by quadrature with a convergence certificate.
///
/// Smooth activations use Gauss-Hermite rules starting at `quadrature_nodes`
/// and doubling; activations with breakpoints use composite Gauss-Legendre
/// panels split at the breakpoints, halving the panel width instead.
pub fn hermite_coefficients_by_quadrature(
    activation: &Activation,
    max_degree: usize,
    quadrature_nodes: usize,
) -> Result<HermiteCoefficients> {
    check_integrable(activation)?;
    if quadrature_nodes < max_degree + 1 {
        return Err(Error::Range(format!(
            "need at least {} quadrature nodes for degree {max_degree}",
            max_degree + 1
        )));
    }
    let breakpoints = activation.breakpoints();
    let (coeffs, nodes_used) = if breakpoints.is_empty() {
        coefficients_gauss_hermite(activation, max_degree, quadrature_nodes)?
    } else {
        coefficients_piecewise(activation, max_degree, &breakpoints)?
    };
    Ok(HermiteCoefficients {
        activation: activation.clone(),
        sources: vec![CoefficientSource::Quadrature; coeffs.len()],
        coeffs,
        nodes_used,
    })
}

/// Coefficients from the best available source: closed form for relu,
/// certified quadrature otherwise.
pub fn hermite_coefficients(activation: &Activation, max_degree: usize) -> Result<HermiteCoefficients> {
    if let Activation::Relu = activation {
        return Ok(HermiteCoefficients {
            activation: activation.clone(),
            coeffs: (0..=max_degree).map(relu_hermite_coefficient).collect(),
            sources: vec![CoefficientSource::ClosedForm; max_degree + 1],
            nodes_used: 0,
        });
    }
    hermite_coefficients_by_quadrature(activation, max_degree, 4 * (max_degree + 1))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn coefficients_gauss_hermite(
    activation: &Activation,
    max_degree: usize,
    start_nodes: usize,
) -> Result<(Vec<f64>, usize)> {
    let mut n = start_nodes.max(4 * (max_degree + 1)).min(MAX_NODES);
    let mut previous = gauss_hermite_coefficients(activation, max_degree, n)?;
    while n < MAX_NODES {
        n = (2 * n).min(MAX_NODES);
        let next = gauss_hermite_coefficients(activation, max_degree, n)?;
        if max_abs_diff(&next, &previous) <= AGREEMENT {
            return Ok((next, n));
        }
        previous = next;
    }
    Err(Error::Convergence(format!(
        "coefficients of {activation} did not stabilise within {MAX_NODES} nodes"
    )))
}

fn gauss_hermite_coefficients(activation: &Activation, max_degree: usize, n: usize) -> Result<Vec<f64>> {
    let rule = gauss_hermite(n)?;
    let mut coeffs = vec![0.0; max_degree + 1];
    for (&x, &lw) in rule.nodes.iter().zip(&rule.log_weights) {
        accumulate(&mut coeffs, x, (0.5 * lw).exp(), activation.eval(x));
    }
    Ok(coeffs)
}

/// Adds `w * phi(x) * H_a(x)` for every `a`, running the recurrence on
/// `sqrt(w) * H_a(x)` so large degrees stay finite in the tails.
fn accumulate(coeffs: &mut [f64], x: f64, sqrt_w: f64, phi: f64) {
    if sqrt_w == 0.0 || phi == 0.0 {
        return;
    }
    let scale = sqrt_w * phi;
    let mut prev = 0.0;
    let mut cur = sqrt_w;
    coeffs[0] += scale * cur;
    for a in 0..coeffs.len() - 1 {
        let next = (x * cur - (a as f64).sqrt() * prev) / ((a + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        coeffs[a + 1] += scale * cur;
    }
}

fn piecewise_spec_for(max_degree: usize) -> PiecewiseSpec {
    let root = ((max_degree + 1) as f64).sqrt();
    PiecewiseSpec {
        half_width: 2.0 * root + 14.0,
        panel_width: (4.0 / root).min(0.5),
        order: 16,
    }
}

fn coefficients_piecewise(
    activation: &Activation,
    max_degree: usize,
    breakpoints: &[f64],
) -> Result<(Vec<f64>, usize)> {
    let mut spec = piecewise_spec_for(max_degree);
    let (mut previous, _) = piecewise_coefficients(activation, max_degree, breakpoints, &spec);
    for _ in 0..6 {
        spec.panel_width *= 0.5;
        let (next, nodes) = piecewise_coefficients(activation, max_degree, breakpoints, &spec);
        if max_abs_diff(&next, &previous) <= AGREEMENT {
            return Ok((next, nodes));
        }
        previous = next;
    }
    Err(Error::Convergence(format!(
        "piecewise coefficients of {activation} did not stabilise"
    )))
}

fn piecewise_coefficients(
    activation: &Activation,
    max_degree: usize,
    breakpoints: &[f64],
    spec: &PiecewiseSpec,
) -> (Vec<f64>, usize) {
    let (rule, sqrt_w) = piecewise_gaussian(spec, breakpoints);
    let mut coeffs = vec![0.0; max_degree + 1];
    for (&x, &sw) in rule.nodes.iter().zip(&sqrt_w) {
        accumulate(&mut coeffs, x, sw, activation.eval(x));
    }
    (coeffs, rule.len())
}

/// `E[phi(z)^2]` for `z ~ N(0, 1)`.
pub fn second_moment(activation: &Activation) -> Result<f64> {
    if let Some(v) = activation.closed_second_moment() {
        return Ok(v);
    }
    check_integrable(activation)?;
    let growth = activation.growth_degree().unwrap_or(0) as usize;
    let spec = piecewise_spec_for(2 * growth);
    let estimate = |spec: &PiecewiseSpec| {
        let (rule, _) = piecewise_gaussian(spec, &activation.breakpoints());
        rule.integrate(|x| activation.eval(x).powi(2))
    };
    let coarse = estimate(&spec);
    let fine = estimate(&PiecewiseSpec {
        panel_width: spec.panel_width * 0.5,
        ..spec
    });
    if (coarse - fine).abs() > AGREEMENT {
        return Err(Error::Convergence(format!("second moment of {activation}")));
    }
    Ok(fine)
}

/// Smallest `d` with `sum_{a > d} c_a^2 <= delta^2`.
pub fn approximate_degree(activation: &Activation, delta: f64, max_search_degree: usize) -> Result<usize> {
    if !(delta > 0.0) {
        return Err(Error::Range("delta must be positive".into()));
    }
    let total = second_moment(activation)?;
    let coeffs = hermite_coefficients(activation, max_search_degree)?;
    let mut tail = total;
    for (d, c) in coeffs.coeffs.iter().enumerate() {
        tail -= c * c;
        if tail <= delta * delta {
            return Ok(d);
        }
    }
    Err(Error::DegreeNotFound {
        max_search: max_search_degree,
        tail,
    })
}

/// Tail weights `sum_{a > d} c_a^2` for `d = 0..=max_degree`, from the
/// second moment and partial sums.
pub fn tail_weights(activation: &Activation, max_degree: usize) -> Result<Vec<f64>> {
    let total = second_moment(activation)?;
    let coeffs = hermite_coefficients(activation, max_degree)?;
    let mut tail = total;
    Ok(coeffs
        .coeffs
        .iter()
        .map(|c| {
            tail -= c * c;
            tail
        })
        .collect())
}

/// Upper bound on `|| relu - min(T, relu) ||` under N(0, 1).
pub fn relu_truncation_bound(t: f64) -> f64 {
    ((-0.5 * t * t).exp() * (t * t + 1.0 - t / (2.0 * PI).sqrt())).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monic_and_normalized_agree() {
        let monic = HermiteBasis::new(10, Normalization::Monic);
        let norm = HermiteBasis::new(10, Normalization::Normalized);
        for &x in &[-2.5, -0.3, 0.0, 1.7] {
            let mut fact = 1.0;
            for a in 0..=10 {
                if a > 0 {
                    fact *= a as f64;
                }
                let lhs = norm.eval(a, x).unwrap();
                let rhs = monic.eval(a, x).unwrap() / fact.sqrt();
                assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
            }
        }
    }

    #[test]
    fn eval_examples() {
        let monic = HermiteBasis::new(4, Normalization::Monic);
        assert_eq!(monic.eval(0, 5.0).unwrap(), 1.0);
        assert_eq!(monic.eval(2, 0.0).unwrap(), -1.0);
        let norm = HermiteBasis::new(4, Normalization::Normalized);
        assert!((norm.eval(2, 0.0).unwrap() + 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(monic.eval(5, 0.0), Err(Error::Range(_))));
    }

    #[test]
    fn eval_all_matches_single() {
        let basis = HermiteBasis::new(12, Normalization::Normalized);
        let all = basis.eval_all(0.9);
        for (a, v) in all.iter().enumerate() {
            assert_eq!(*v, hermite_normalized(a, 0.9));
        }
    }

    #[test]
    fn sigmoid_mean_is_half() {
        let c = hermite_coefficients_by_quadrature(&Activation::Sigmoid, 0, 4).unwrap();
        assert!((c.coeffs[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn custom_without_growth_is_refused() {
        let act = Activation::Custom(crate::activation::CustomActivation {
            name: "exp".into(),
            f: std::sync::Arc::new(|x: f64| x.exp()),
            breakpoints: vec![],
            growth: None,
            lipschitz: f64::INFINITY,
        });
        assert!(matches!(
            hermite_coefficients_by_quadrature(&act, 3, 16),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn too_few_nodes_is_a_range_error() {
        assert!(matches!(
            hermite_coefficients_by_quadrature(&Activation::Tanh, 10, 5),
            Err(Error::Range(_))
        ));
    }
}
