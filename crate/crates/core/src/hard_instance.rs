//! The one-hidden-layer hard instance: an alternating sum of `2m` ridge units
//! at equally spaced angles, optionally composed with an outer link and
//! embedded into `R^n`.

use std::f64::consts::{LN_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::funcspace::{orthonormal_basis, standard_normal_vec, FunctionHandle};
use crate::hermite::{hermite_coefficients, relu_truncation_bound};
use crate::quadrature::{piecewise_gaussian, PiecewiseSpec};

/// `T(a, m) = sum_{t=0}^{m-1} (-1)^t cos^a(t pi / m)` by direct summation.
pub fn trig_power_sum_direct(a: u32, m: u32) -> f64 {
    (0..m)
        .map(|t| {
            let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
            sign * (t as f64 * PI / m as f64).cos().powi(a as i32)
        })
        .sum()
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `T(a, m)` in closed form.
///
/// Expanding `cos^a` in exponentials leaves a geometric sum per binomial
/// term. When `a` and `m` have the same parity only the terms with
/// `j = (a + m)/2 - q m` survive, giving `2^{-a} m sum_q C(a, j)`; when the
/// parities differ every term contributes exactly `2^{-a} C(a, j)`, so the
/// sum is 1.
pub fn trig_power_sum_closed(a: u32, m: u32) -> f64 {
    assert!(m >= 1, "m must be positive");
    if (a + m) % 2 == 1 {
        return 1.0;
    }
    let centre = ((a + m) / 2) as i64;
    let step = m as i64;
    let log_prefix = (m as f64).ln() - a as f64 * LN_2;
    let mut total = 0.0;
    let q_min = (centre - a as i64).div_euclid(step) - 1;
    let q_max = centre.div_euclid(step) + 1;
    for q in q_min..=q_max {
        let j = centre - q * step;
        if (0..=a as i64).contains(&j) {
            total += (log_prefix + ln_binomial(a, j as u32)).exp();
        }
    }
    total
}

/// `S(a, m) = 2m sum_{t=0}^{2m-1} (-1)^t cos^a(t pi / m)`, which is
/// `4m T(a, m)` for even `a` and zero for odd `a`.
pub fn s_coefficient(a: u32, m: u32) -> Result<f64> {
    if m == 0 || m % 2 == 1 {
        return Err(Error::Contract(format!("m must be even and positive, got {m}")));
    }
    if a % 2 == 1 {
        return Ok(0.0);
    }
    Ok(4.0 * m as f64 * trig_power_sum_closed(a, m))
}

#[derive(Debug, Clone)]
pub struct HardInstance {
    pub m: u32,
    pub phi: Activation,
    pub psi: Activation,
    /// Rows of `A`, each of length `n`, orthonormal.
    pub embedding: [Vec<f64>; 2],
}

impl HardInstance {
    /// The planar instance with `A = I_2`.
    pub fn new(m: u32, phi: Activation, psi: Activation) -> Result<Self> {
        check_m(m)?;
        Ok(Self {
            m,
            phi,
            psi,
            embedding: [vec![1.0, 0.0], vec![0.0, 1.0]],
        })
    }

    pub fn with_embedding(m: u32, phi: Activation, psi: Activation, rows: [Vec<f64>; 2]) -> Result<Self> {
        check_m(m)?;
        let n = rows[0].len();
        if n < 2 || rows[1].len() != n {
            return Err(Error::Contract("embedding rows must share a length of at least 2".into()));
        }
        let gram = [
            crate::funcspace::dot(&rows[0], &rows[0]),
            crate::funcspace::dot(&rows[0], &rows[1]),
            crate::funcspace::dot(&rows[1], &rows[1]),
        ];
        if (gram[0] - 1.0).abs() > 1e-12 || gram[1].abs() > 1e-12 || (gram[2] - 1.0).abs() > 1e-12 {
            return Err(Error::Contract("embedding rows are not orthonormal".into()));
        }
        Ok(Self {
            m,
            phi,
            psi,
            embedding: rows,
        })
    }

    pub fn dimension(&self) -> usize {
        self.embedding[0].len()
    }

    pub fn hidden_units(&self) -> u32 {
        2 * self.m
    }

    /// Planar unit weights `w_i = (cos(i pi/m), sin(i pi/m))`, `i = 1..2m`.
    pub fn planar_weights(&self) -> Vec<[f64; 2]> {
        (1..=2 * self.m)
            .map(|i| {
                let angle = i as f64 * PI / self.m as f64;
                [angle.cos(), angle.sin()]
            })
            .collect()
    }

    /// Outer coefficients `(-1)^i / (2m)`.
    pub fn outer_coefficients(&self) -> Vec<f64> {
        (1..=2 * self.m)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } / (2.0 * self.m as f64))
            .collect()
    }

    /// Ridge weights in `R^n`: `A^T w_i`.
    pub fn lifted_weights(&self) -> Vec<Vec<f64>> {
        let [r0, r1] = &self.embedding;
        self.planar_weights()
            .iter()
            .map(|w| r0.iter().zip(r1).map(|(a, b)| w[0] * a + w[1] * b).collect())
            .collect()
    }

    /// `g(Ax)` as a structured handle.
    pub fn g_handle(&self) -> FunctionHandle {
        let terms = self
            .lifted_weights()
            .into_iter()
            .zip(self.outer_coefficients())
            .map(|(w, c)| FunctionHandle::scaled(c, FunctionHandle::ridge(self.phi.clone(), w)))
            .collect();
        FunctionHandle::sum(terms).expect("instance has at least two units")
    }

    /// `psi(g(Ax))`.
    pub fn f_handle(&self) -> FunctionHandle {
        FunctionHandle::composed(self.psi.clone(), self.g_handle())
    }

    /// Evaluates the planar core `g` at `z in R^2`.
    pub fn g_planar(&self, z: [f64; 2]) -> f64 {
        self.planar_weights()
            .iter()
            .zip(self.outer_coefficients())
            .fold(0.0, |acc, (w, c)| acc + c * self.phi.eval(w[0] * z[0] + w[1] * z[1]))
    }
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 || m % 2 == 1 {
        return Err(Error::Contract(format!("m must be even and positive, got {m}")));
    }
    Ok(())
}

/// Embeds the planar instance into `R^n` with seeded orthonormal rows.
pub fn make_embedded_instance(m: u32, phi: Activation, psi: Activation, n: usize, seed: u64) -> Result<HardInstance> {
    if n < 2 {
        return Err(Error::Contract(format!("embedding dimension must be at least 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let raw = vec![standard_normal_vec(&mut rng, n), standard_normal_vec(&mut rng, n)];
        let basis = orthonormal_basis(&raw);
        if basis.len() == 2 {
            let [r0, r1]: [Vec<f64>; 2] = basis.try_into().expect("two rows");
            return HardInstance::with_embedding(m, phi, psi, [r0, r1]);
        }
    }
}

/// Result of summing the Hermite series for `||g||^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSeries {
    /// Partial sum plus tail correction.
    pub value: f64,
    /// `(1/4m^2) sum_{a <= D} c_a^2 S(a, m)`.
    pub partial: f64,
    /// Remainder estimated with `T(a, m) = 1` beyond `D`.
    pub tail: f64,
    /// Bound on the error of the tail estimate.
    pub tail_error: f64,
    /// False when `T(a, m)` has not settled near 1 by degree `D`, so the
    /// tail estimate is unreliable.
    pub tail_certified: bool,
    pub max_degree: u32,
}

pub fn default_max_degree(m: u32) -> u32 {
    200.max(100 * m)
}

/// `||g||^2 = (1/4m^2) sum_a c_a^2 S(a, m)`.
///
/// Past degree `D` the weights `S(a, m)/(4m^2)` tend to `1/m` on even `a`,
/// so the remainder is `(1/m)` times the even tail of the activation.
pub fn norm_squared_g(instance: &HardInstance, max_degree: u32) -> Result<NormSeries> {
    let m = instance.m;
    let coeffs = hermite_coefficients(&instance.phi, max_degree as usize)?;
    let scale = 4.0 * (m as f64).powi(2);
    let mut partial = 0.0;
    let mut even_sum = 0.0;
    for (a, c) in coeffs.coeffs.iter().enumerate() {
        if a % 2 == 0 {
            even_sum += c * c;
            partial += c * c * s_coefficient(a as u32, m)? / scale;
        }
    }
    let even_tail = (even_second_moment(&instance.phi)? - even_sum).max(0.0);
    let tail = even_tail / m as f64;
    let last_even = max_degree - max_degree % 2;
    let deviation = [last_even, last_even + 2]
        .iter()
        .map(|&a| (trig_power_sum_closed(a, m) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(NormSeries {
        value: partial + tail,
        partial,
        tail,
        tail_error: deviation * tail,
        tail_certified: deviation < 1e-3,
        max_degree,
    })
}

/// `E[phi_even^2]` where `phi_even(x) = (phi(x) + phi(-x))/2`.
pub fn even_second_moment(phi: &Activation) -> Result<f64> {
    match phi {
        Activation::Relu => Ok(0.25),
        Activation::Sigmoid | Activation::Tanh | Activation::Sign | Activation::Lsgn(_) => {
            let c0 = hermite_coefficients(phi, 0)?.coeffs[0];
            Ok(c0 * c0)
        }
        _ => {
            let growth = phi
                .growth_degree()
                .ok_or_else(|| Error::Unsupported(format!("{phi} has no growth bound")))?;
            let mut breaks = phi.breakpoints();
            breaks.extend(phi.breakpoints().iter().map(|b| -b));
            let spec = PiecewiseSpec {
                half_width: (2.0 * (2.0 * growth as f64).sqrt() + 12.0).max(14.0),
                ..PiecewiseSpec::default()
            };
            let (rule, _) = piecewise_gaussian(&spec, &breaks);
            Ok(rule.integrate(|x| (0.5 * (phi.eval(x) + phi.eval(-x))).powi(2)))
        }
    }
}

/// An anti-concentration lower bound on `||f||` with its ingredients.
#[derive(Debug, Clone, PartialEq)]
pub struct NormLowerBound {
    pub value: f64,
    /// Threshold `t` in `Pr[|g| > t]`.
    pub threshold: f64,
    /// Lower bound used for `||g||` (or its truncation).
    pub g_norm: f64,
    /// Lower bound on `Pr[|g| > t]`.
    pub probability: f64,
    /// Bound `B` on `|g|` (or on the truncated core).
    pub sup_bound: f64,
}

/// Lower bound on `||tanh(g)||` at the default threshold `t = G / sqrt(2)`,
/// which maximises `t^2 (G^2 - t^2)`.
pub fn norm_lower_bound_f(instance: &HardInstance) -> Result<NormLowerBound> {
    let g = core_norm_lower(instance)?;
    norm_lower_bound_f_at(instance, g / 2f64.sqrt())
}

/// Truncation level used for relu cores.
pub fn truncation_level(m: u32) -> f64 {
    5.0 * m as f64
}

fn core_norm_lower(instance: &HardInstance) -> Result<f64> {
    let series = norm_squared_g(instance, default_max_degree(instance.m))?;
    let g = series.value.max(0.0).sqrt();
    Ok(match instance.phi {
        Activation::Relu => (g - relu_truncation_bound(truncation_level(instance.m))).max(0.0),
        _ => g,
    })
}

pub fn norm_lower_bound_f_at(instance: &HardInstance, t: f64) -> Result<NormLowerBound> {
    if !matches!(instance.psi, Activation::Tanh) {
        return Err(Error::Unsupported(format!("outer link {} (need tanh)", instance.psi)));
    }
    let g_norm = core_norm_lower(instance)?;
    let (sup_bound, slack) = match instance.phi {
        Activation::Relu => {
            let level = truncation_level(instance.m);
            (level, 2.0 * instance.m as f64 * (-0.5 * level * level).exp())
        }
        Activation::Sigmoid => (1.0, 0.0),
        _ => return Err(Error::Unsupported(format!("inner activation {}", instance.phi))),
    };
    let probability = if t >= g_norm || t < 0.0 {
        0.0
    } else {
        ((g_norm * g_norm - t * t) / (sup_bound * sup_bound - t * t) - slack).max(0.0)
    };
    Ok(NormLowerBound {
        value: t.max(0.0).tanh() * probability.sqrt(),
        threshold: t,
        g_norm,
        probability,
        sup_bound,
    })
}
