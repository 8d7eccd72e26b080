use crate::error::{Error, Result};
use crate::quadrature::{piecewise_gaussian, polar_gaussian, LineKink, PiecewiseSpec, PolarSpec};

use crate::activation::Activation;

use super::handle::{dot, FunctionHandle, Hints, Structure};
use super::montecarlo::{mc_gaussian, Estimate, McConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Quadrature when the integrand lives on at most two directions,
    /// otherwise Monte Carlo with default settings.
    Auto,
    Quadrature,
    MonteCarlo(McConfig),
}

/// Orthonormal basis of the span of `directions`, by modified Gram-Schmidt.
pub fn orthonormal_basis(directions: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for d in directions {
        let scale = dot(d, d).sqrt();
        if scale == 0.0 {
            continue;
        }
        let mut v: Vec<f64> = d.iter().map(|x| x / scale).collect();
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= p * bi);
            }
        }
        let len = dot(&v, &v).sqrt();
        if len > 1e-9 {
            v.iter_mut().for_each(|x| *x /= len);
            basis.push(v);
        }
    }
    basis
}

fn standard_basis(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|k| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            e
        })
        .collect()
}

/// Polar rule resolution suited to integrands of a given polynomial growth.
pub fn polar_spec_for_growth(growth: u32) -> PolarSpec {
    let g = growth as f64;
    let r_max = (2.0 * g.sqrt() + 8.0).max(10.0);
    PolarSpec {
        theta_panels: 128 * (growth as usize).div_ceil(12).max(1),
        theta_order: 6,
        r_panels: (r_max / 2.0).ceil() as usize,
        r_order: 12,
        r_max,
    }
}

/// `E[f(x)]` over `x ~ N(0, I_n)`, using `hints` to pick and shape the rule.
pub fn gaussian_expectation(
    n: usize,
    hints: &Hints,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    method: &Method,
) -> Result<Estimate> {
    match method {
        Method::MonteCarlo(cfg) => Ok(mc_gaussian(cfg, n, f)),
        Method::Quadrature => gaussian_quadrature(n, hints, f, None).map(Estimate::exact),
        Method::Auto => match effective_basis(n, hints) {
            Some(b) if b.len() <= 2 => Ok(Estimate::exact(quadrature_on_subspace(n, &b, hints, f, None))),
            _ => Ok(mc_gaussian(&McConfig::default(), n, f)),
        },
    }
}

/// Orthonormal basis of the directions `hints` declares, or of `R^n` when
/// `n <= 2`; `None` when unknown.
pub fn effective_basis(n: usize, hints: &Hints) -> Option<Vec<Vec<f64>>> {
    match &hints.directions {
        Some(d) => Some(orthonormal_basis(d)),
        None if n <= 2 => Some(standard_basis(n)),
        None => None,
    }
}

/// Deterministic `E[f(x)]` for integrands living on at most two directions.
/// `spec` overrides the polar resolution chosen from the growth hint.
pub fn gaussian_quadrature(
    n: usize,
    hints: &Hints,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    spec: Option<&PolarSpec>,
) -> Result<f64> {
    match effective_basis(n, hints) {
        Some(b) if b.len() <= 2 => Ok(quadrature_on_subspace(n, &b, hints, f, spec)),
        _ => Err(Error::Unsupported(
            "quadrature needs an integrand depending on at most two directions".into(),
        )),
    }
}

fn quadrature_on_subspace(
    n: usize,
    basis: &[Vec<f64>],
    hints: &Hints,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    spec: Option<&PolarSpec>,
) -> f64 {
    let growth = hints.growth.unwrap_or(4);
    match basis.len() {
        0 => f(&vec![0.0; n]),
        1 => {
            let u = &basis[0];
            let breaks: Vec<f64> = hints
                .kinks
                .iter()
                .filter_map(|k| {
                    let s = dot(&k.normal, u);
                    (s.abs() > 1e-14).then(|| k.offset / s)
                })
                .collect();
            let spec = PiecewiseSpec {
                half_width: (2.0 * (growth as f64).sqrt() + 10.0).max(14.0),
                ..PiecewiseSpec::default()
            };
            let (rule, _) = piecewise_gaussian(&spec, &breaks);
            let mut x = vec![0.0; n];
            rule.integrate(|z| {
                x.iter_mut().zip(u).for_each(|(xi, ui)| *xi = z * ui);
                f(&x)
            })
        }
        _ => {
            let kinks = plane_kinks(basis, hints);
            let chosen = spec.cloned().unwrap_or_else(|| polar_spec_for_growth(growth));
            let rule = polar_gaussian(&chosen, &kinks);
            integrate_plane(n, basis, &rule.points, &rule.weights, f)
        }
    }
}

/// Kinks expressed in the coordinates of a two-dimensional basis.
pub fn plane_kinks(basis: &[Vec<f64>], hints: &Hints) -> Vec<LineKink> {
    hints
        .kinks
        .iter()
        .map(|k| LineKink {
            normal: [dot(&k.normal, &basis[0]), dot(&k.normal, &basis[1])],
            offset: k.offset,
        })
        .filter(|k| k.normal[0] != 0.0 || k.normal[1] != 0.0)
        .collect()
}

/// Lifts plane points into `R^n` and sums the weighted integrand.
pub fn integrate_plane(
    n: usize,
    basis: &[Vec<f64>],
    points: &[[f64; 2]],
    weights: &[f64],
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
) -> f64 {
    let mut x = vec![0.0; n];
    points.iter().zip(weights).fold(0.0, |acc, (z, w)| {
        for (k, xk) in x.iter_mut().enumerate() {
            *xk = z[0] * basis[0][k] + z[1] * basis[1][k];
        }
        acc + w * f(&x)
    })
}

pub fn inner_product(f: &FunctionHandle, g: &FunctionHandle, method: &Method) -> Result<Estimate> {
    if f.arity() != g.arity() {
        return Err(Error::Arity {
            expected: f.arity(),
            got: g.arity(),
        });
    }
    if *method == Method::Auto {
        if let (Structure::Polynomial(p), Structure::Polynomial(q)) = (f.structure(), g.structure()) {
            let v = p
                .terms()
                .iter()
                .flat_map(|(i, a)| q.terms().iter().filter(move |(j, _)| i == j).map(move |(_, b)| a * b))
                .sum();
            return Ok(Estimate::exact(v));
        }
        if let (Some(a), Some(b)) = (relu_expansion(f), relu_expansion(g)) {
            let v = a
                .iter()
                .flat_map(|(ca, wa)| b.iter().map(move |(cb, wb)| ca * cb * relu_kernel(wa, wb)))
                .sum();
            return Ok(Estimate::exact(v));
        }
    }
    let hints = f.hints().combine(&g.hints());
    gaussian_expectation(f.arity(), &hints, &|x| f.eval(x) * g.eval(x), method)
}

/// `f` as `sum_i c_i relu(<w_i, x>)`, when it has that shape.
fn relu_expansion(f: &FunctionHandle) -> Option<Vec<(f64, Vec<f64>)>> {
    match f.structure() {
        Structure::Constant(c) if *c == 0.0 => Some(Vec::new()),
        Structure::Ridge {
            activation: Activation::Relu,
            weight,
        } => Some(vec![(1.0, weight.clone())]),
        Structure::Scaled { factor, inner } => {
            relu_expansion(inner).map(|v| v.into_iter().map(|(c, w)| (c * factor, w)).collect())
        }
        Structure::Sum(terms) => terms.iter().map(relu_expansion).collect::<Option<Vec<_>>>().map(|v| v.concat()),
        _ => None,
    }
}

/// `E[relu(<u, x>) relu(<v, x>)]`, the first-order arc-cosine kernel.
fn relu_kernel(u: &[f64], v: &[f64]) -> f64 {
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    let cos = (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0);
    let theta = cos.acos();
    nu * nv * (theta.sin() + (std::f64::consts::PI - theta) * cos) / (2.0 * std::f64::consts::PI)
}

/// `||f||` with the standard error propagated from `E[f^2]`.
pub fn norm(f: &FunctionHandle, method: &Method) -> Result<Estimate> {
    if let (Method::Auto, Some(h)) = (method, f.norm_hint()) {
        return Ok(Estimate::exact(h));
    }
    let sq = inner_product(f, f, method)?;
    let value = sq.value.max(0.0).sqrt();
    let std_error = if value > 0.0 { sq.std_error / (2.0 * value) } else { sq.std_error.sqrt() };
    Ok(Estimate { value, std_error })
}

pub fn norm_squared(f: &FunctionHandle, method: &Method) -> Result<Estimate> {
    inner_product(f, f, method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::HermitePolynomial;

    #[test]
    fn relu_norm_examples() {
        let f = FunctionHandle::ridge(Activation::Relu, vec![0.5, 0.0, 0.0]);
        let q = norm(&f, &Method::Quadrature).unwrap();
        assert!((q.value - 0.5 / 2f64.sqrt()).abs() < 1e-12);
        let e1 = FunctionHandle::ridge(Activation::Relu, vec![1.0, 0.0, 0.0, 0.0]);
        let ip = inner_product(&e1, &e1, &Method::Auto).unwrap();
        assert!((ip.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_and_sign_norms() {
        assert_eq!(norm(&FunctionHandle::zero(3), &Method::Auto).unwrap().value, 0.0);
        let s = FunctionHandle::ridge(Activation::Sign, vec![0.6, 0.8]);
        assert!((norm(&s, &Method::Quadrature).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn arc_cosine_kernel() {
        let u = vec![1.0, 0.0];
        let v = vec![0.3f64.cos(), 0.3f64.sin()];
        let f = FunctionHandle::ridge(Activation::Relu, u);
        let g = FunctionHandle::ridge(Activation::Relu, v);
        let got = inner_product(&f, &g, &Method::Quadrature).unwrap().value;
        let t: f64 = 0.3;
        let want = (t.sin() + (std::f64::consts::PI - t) * t.cos()) / (2.0 * std::f64::consts::PI);
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        let closed = inner_product(&f, &g, &Method::Auto).unwrap().value;
        assert!((closed - want).abs() < 1e-15);
    }

    #[test]
    fn relu_sums_use_the_kernel() {
        let f = FunctionHandle::sum(vec![
            FunctionHandle::scaled(0.7, FunctionHandle::ridge(Activation::Relu, vec![0.3, -1.2])),
            FunctionHandle::scaled(-1.1, FunctionHandle::ridge(Activation::Relu, vec![0.9, 0.4])),
        ])
        .unwrap();
        let g = FunctionHandle::ridge(Activation::Relu, vec![-0.5, 0.5]);
        let a = inner_product(&f, &g, &Method::Auto).unwrap().value;
        let q = inner_product(&f, &g, &Method::Quadrature).unwrap().value;
        assert!((a - q).abs() < 1e-12, "{a} vs {q}");
    }

    #[test]
    fn hermite_basis_orthogonal_in_plane() {
        let set = crate::funcspace::enumerate_multi_indices(2, 3);
        for i in &set.indices {
            for j in &set.indices {
                let f = FunctionHandle::polynomial(HermitePolynomial::basis(i.clone()));
                let g = FunctionHandle::polynomial(HermitePolynomial::basis(j.clone()));
                let v = inner_product(&f, &g, &Method::Quadrature).unwrap().value;
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-11, "{i:?} {j:?} {v}");
            }
        }
    }

    #[test]
    fn quadrature_refuses_three_directions() {
        let f = FunctionHandle::polynomial(HermitePolynomial::monomial(3, &[0, 1, 2]));
        assert!(matches!(
            inner_product(&f, &f, &Method::Quadrature),
            Err(Error::Unsupported(_))
        ));
        let g = FunctionHandle::zero(2);
        assert!(matches!(inner_product(&f, &g, &Method::Auto), Err(Error::Arity { .. })));
    }
}
