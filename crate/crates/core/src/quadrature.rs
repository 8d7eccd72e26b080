//! Quadrature rules against the standard Gaussian measure in one and two dimensions.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of a rule for `E[F(z)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Rule1d {
    assert!(n > 0, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule1d { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Hermite rule for the probability weight `exp(-x^2/2)/sqrt(2 pi)`.
///
/// Weights are also returned as logarithms so callers can work with
/// `sqrt(w)` far into the tails without underflow.
#[derive(Debug, Clone)]
pub struct HermiteRule {
    pub nodes: Vec<f64>,
    pub log_weights: Vec<f64>,
}

impl HermiteRule {
    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|lw| lw.exp()).collect()
    }
}

pub fn gauss_hermite(n: usize) -> Result<HermiteRule> {
    if n == 0 {
        return Err(Error::Range("gauss_hermite needs at least one node".into()));
    }
    let mut d = vec![0.0; n];
    let mut e: Vec<f64> = (0..n)
        .map(|k| if k + 1 < n { ((k + 1) as f64).sqrt() } else { 0.0 })
        .collect();
    tridiagonal_eigenvalues(&mut d, &mut e)?;
    d.sort_by(|a, b| a.total_cmp(b));

    let mut log_weights = Vec::with_capacity(n);
    for x in d.iter_mut() {
        for _ in 0..3 {
            let (ratio, _) = hermite_ratio(n, *x);
            *x -= ratio;
        }
        let (_, log_prev) = hermite_ratio(n, *x);
        log_weights.push(-(n as f64).ln() - 2.0 * log_prev);
    }
    symmetrize(&mut d, &mut log_weights);
    Ok(HermiteRule {
        nodes: d,
        log_weights,
    })
}

fn symmetrize(nodes: &mut [f64], log_weights: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -x;
        nodes[j] = x;
        let lw = 0.5 * (log_weights[i] + log_weights[j]);
        log_weights[i] = lw;
        log_weights[j] = lw;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

/// Returns `h_n(x) / (sqrt(n) h_{n-1}(x))` and `ln |h_{n-1}(x)|` for the
/// orthonormal Hermite recurrence, rescaling to stay finite.
fn hermite_ratio(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut log_scale = 0.0;
    for k in 0..n - 1 {
        let next = (x * cur - (k as f64).sqrt() * prev) / ((k + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            prev *= 1e-150;
            cur *= 1e-150;
            log_scale += 150.0 * 10f64.ln();
        }
    }
    let last = (x * cur - ((n - 1) as f64).sqrt() * prev) / (n as f64).sqrt();
    (last / ((n as f64).sqrt() * cur), cur.abs().ln() + log_scale)
}

/// Implicit QL on a symmetric tridiagonal matrix; eigenvalues only.
/// `e[i]` couples `d[i]` and `d[i + 1]`.
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::Convergence(
                    "tridiagonal QL did not converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Composite Gauss-Legendre rule for `E[F(z)]`, `z ~ N(0, 1)`, on `[-half_width, half_width]`.
///
/// Every breakpoint inside the interval becomes a panel edge, so integrands
/// that are smooth between breakpoints converge geometrically.
#[derive(Debug, Clone)]
pub struct PiecewiseSpec {
    pub half_width: f64,
    pub panel_width: f64,
    pub order: usize,
}

impl Default for PiecewiseSpec {
    fn default() -> Self {
        Self {
            half_width: 14.0,
            panel_width: 0.5,
            order: 16,
        }
    }
}

/// Returns the rule together with `sqrt(weight)` per node.
pub fn piecewise_gaussian(spec: &PiecewiseSpec, breakpoints: &[f64]) -> (Rule1d, Vec<f64>) {
    let edges = panel_edges(-spec.half_width, spec.half_width, spec.panel_width, breakpoints);
    let gl = gauss_legendre(spec.order);
    let mut nodes = Vec::with_capacity(edges.len() * spec.order);
    let mut weights = Vec::with_capacity(nodes.capacity());
    let mut sqrt_weights = Vec::with_capacity(nodes.capacity());
    let log_norm = 0.5 * (2.0 * PI).ln();
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (t, w) in gl.nodes.iter().zip(&gl.weights) {
            let x = mid + half * t;
            let log_w = (w * half).ln() - 0.5 * x * x - log_norm;
            nodes.push(x);
            weights.push(log_w.exp());
            sqrt_weights.push((0.5 * log_w).exp());
        }
    }
    (Rule1d { nodes, weights }, sqrt_weights)
}

fn panel_edges(lo: f64, hi: f64, width: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|b| b.is_finite() && *b > lo && *b < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
    let mut edges = vec![cuts[0]];
    for pair in cuts.windows(2) {
        let count = ((pair[1] - pair[0]) / width).ceil().max(1.0) as usize;
        for k in 1..=count {
            edges.push(pair[0] + (pair[1] - pair[0]) * k as f64 / count as f64);
        }
    }
    edges
}

/// A kink of the integrand along the line `<w, z> = offset` in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineKink {
    pub normal: [f64; 2],
    pub offset: f64,
}

/// Polar product rule for `E[F(z)]`, `z ~ N(0, I_2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarSpec {
    pub theta_panels: usize,
    pub theta_order: usize,
    pub r_panels: usize,
    pub r_order: usize,
    pub r_max: f64,
}

impl Default for PolarSpec {
    fn default() -> Self {
        Self {
            theta_panels: 128,
            theta_order: 6,
            r_panels: 5,
            r_order: 12,
            r_max: 10.0,
        }
    }
}

impl PolarSpec {
    /// Lighter rule for inner loops over smooth ridge combinations.
    pub fn coarse() -> Self {
        Self {
            theta_panels: 64,
            theta_order: 4,
            r_panels: 3,
            r_order: 8,
            r_max: 9.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Rule2d {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl Rule2d {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut([f64; 2]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }
}

/// Builds a polar rule. Kinks through the origin become angular panel edges;
/// the others split the radial panels at each angle.
pub fn polar_gaussian(spec: &PolarSpec, kinks: &[LineKink]) -> Rule2d {
    let two_pi = 2.0 * PI;
    let mut rays = Vec::new();
    for k in kinks {
        if k.offset == 0.0 && (k.normal[0] != 0.0 || k.normal[1] != 0.0) {
            let a = k.normal[1].atan2(k.normal[0]);
            for shift in [0.5 * PI, -0.5 * PI] {
                rays.push((a + shift).rem_euclid(two_pi));
            }
        }
    }
    let theta_edges = panel_edges(0.0, two_pi, two_pi / spec.theta_panels as f64, &rays);
    let gl_theta = gauss_legendre(spec.theta_order);
    let gl_r = gauss_legendre(spec.r_order);
    let offsets: Vec<&LineKink> = kinks.iter().filter(|k| k.offset != 0.0).collect();

    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut r_cuts = Vec::new();
    for pair in theta_edges.windows(2) {
        let half_t = 0.5 * (pair[1] - pair[0]);
        let mid_t = 0.5 * (pair[0] + pair[1]);
        for (tt, wt) in gl_theta.nodes.iter().zip(&gl_theta.weights) {
            let theta = mid_t + half_t * tt;
            let (s, c) = theta.sin_cos();
            r_cuts.clear();
            for k in &offsets {
                let proj = k.normal[0] * c + k.normal[1] * s;
                if proj != 0.0 {
                    let r = k.offset / proj;
                    if r > 0.0 {
                        r_cuts.push(r);
                    }
                }
            }
            let r_edges = panel_edges(0.0, spec.r_max, spec.r_max / spec.r_panels as f64, &r_cuts);
            for rp in r_edges.windows(2) {
                let half_r = 0.5 * (rp[1] - rp[0]);
                let mid_r = 0.5 * (rp[0] + rp[1]);
                for (tr, wr) in gl_r.nodes.iter().zip(&gl_r.weights) {
                    let r = mid_r + half_r * tr;
                    let w = wt * half_t * wr * half_r * r * (-0.5 * r * r).exp() / two_pi;
                    points.push([r * c, r * s]);
                    weights.push(w);
                }
            }
        }
    }
    Rule2d { points, weights }
}
