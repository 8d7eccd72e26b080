use std::path::Path;

use crate::activation::Activation;
use crate::cli::{emit_csv, fmt_f64};
use crate::error::{Error, Result};
use crate::funcspace::{inner_product, mc_vector, standard_normal_vec, FunctionHandle, HermitePolynomial, McConfig, Method};

#[derive(Debug, Clone, PartialEq)]
pub enum GramMethod {
    /// Closed forms or quadrature, pair by pair.
    Exact,
    /// All entries from one shared set of Gaussian samples.
    MonteCarlo(McConfig),
}

/// A finite class with its matrix of pairwise correlations.
#[derive(Debug, Clone)]
pub struct FiniteClass {
    members: Vec<FunctionHandle>,
    gram: Vec<Vec<f64>>,
    gram_std_error: Vec<Vec<f64>>,
}

impl FiniteClass {
    pub fn new(members: Vec<FunctionHandle>, method: &GramMethod) -> Result<Self> {
        let n = members.len();
        let arity = members.first().map(|m| m.arity()).unwrap_or(0);
        if let Some(m) = members.iter().find(|m| m.arity() != arity) {
            return Err(Error::Arity {
                expected: arity,
                got: m.arity(),
            });
        }
        let mut gram = vec![vec![0.0; n]; n];
        let mut err = vec![vec![0.0; n]; n];
        match method {
            GramMethod::Exact => {
                for i in 0..n {
                    for j in i..n {
                        let e = inner_product(&members[i], &members[j], &Method::Auto)?;
                        gram[i][j] = e.value;
                        gram[j][i] = e.value;
                        err[i][j] = e.std_error;
                        err[j][i] = e.std_error;
                    }
                }
            }
            GramMethod::MonteCarlo(cfg) => {
                let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
                let est = mc_vector(cfg, pairs.len(), |rng, out| {
                    let x = standard_normal_vec(rng, arity);
                    let v: Vec<f64> = members.iter().map(|m| m.eval(&x)).collect();
                    for (o, &(i, j)) in out.iter_mut().zip(&pairs) {
                        *o = v[i] * v[j];
                    }
                });
                for (e, &(i, j)) in est.iter().zip(&pairs) {
                    gram[i][j] = e.value;
                    gram[j][i] = e.value;
                    err[i][j] = e.std_error;
                    err[j][i] = e.std_error;
                }
            }
        }
        Ok(Self {
            members,
            gram,
            gram_std_error: err,
        })
    }

    /// A class with a given correlation matrix and no functions attached.
    pub fn from_gram(gram: Vec<Vec<f64>>) -> Result<Self> {
        let n = gram.len();
        for (i, row) in gram.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Contract("gram matrix must be square".into()));
            }
            for j in 0..n {
                if row[j] != gram[j][i] {
                    return Err(Error::Contract(format!("gram matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            members: Vec::new(),
            gram_std_error: vec![vec![0.0; n]; n],
            gram,
        })
    }

    pub fn len(&self) -> usize {
        self.gram.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gram.is_empty()
    }

    pub fn members(&self) -> &[FunctionHandle] {
        &self.members
    }

    pub fn gram(&self) -> &[Vec<f64>] {
        &self.gram
    }

    pub fn gram_std_error(&self) -> &[Vec<f64>] {
        &self.gram_std_error
    }

    pub fn write_gram_csv(&self, path: &Path) -> Result<()> {
        let rows: Vec<Vec<String>> = (0..self.len())
            .flat_map(|i| {
                (0..self.len()).map(move |j| {
                    vec![
                        i.to_string(),
                        j.to_string(),
                        fmt_f64(self.gram[i][j]),
                        fmt_f64(self.gram_std_error[i][j]),
                    ]
                })
            })
            .collect();
        emit_csv(path, &["i", "j", "value", "std_error"], &rows)
    }
}

/// `(1 / s^2) sum_{i, j in subset} |<c_i, c_j>|`.
pub fn average_correlation(cls: &FiniteClass, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::Contract("average correlation of an empty subset".into()));
    }
    if let Some(&i) = subset.iter().find(|&&i| i >= cls.len()) {
        return Err(Error::Range(format!("index {i} outside a class of {}", cls.len())));
    }
    let g = cls.gram();
    let total: f64 = subset.iter().map(|&i| subset.iter().map(|&j| g[i][j].abs()).sum::<f64>()).sum();
    let s = subset.len() as f64;
    Ok(total / (s * s))
}

/// Binomial coefficient as `f64`.
pub fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn subsets_of_size(n: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, d, &mut Vec::new(), &mut out);
    out
}

pub const MONOMIAL_CLASS_CAP: usize = 5000;

/// All multilinear monomials `x_S` with `|S| = d` in `n` variables,
/// optionally composed with tanh.
pub fn monomial_class(n: usize, d: usize, with_tanh: bool, method: Option<GramMethod>) -> Result<FiniteClass> {
    if d > n {
        return Err(Error::Range(format!("degree {d} exceeds dimension {n}")));
    }
    let size = binomial(n, d);
    if size > MONOMIAL_CLASS_CAP as f64 {
        return Err(Error::ClassTooLarge {
            size: size as usize,
            limit: MONOMIAL_CLASS_CAP,
        });
    }
    let members = subsets_of_size(n, d)
        .into_iter()
        .map(|s| {
            let p = FunctionHandle::polynomial(HermitePolynomial::monomial(n, &s));
            if with_tanh {
                FunctionHandle::composed(Activation::Tanh, p)
            } else {
                p
            }
        })
        .collect();
    let method = method.unwrap_or(if with_tanh {
        GramMethod::MonteCarlo(McConfig::default())
    } else {
        GramMethod::Exact
    });
    FiniteClass::new(members, &method)
}

/// Lower bound on `||tanh(x_S)||^2` for `|S| = d`:
/// `tanh(1/2)^2 (1/4) 3^{-d}`.
pub fn monomial_norm_lower_bound(d: u32) -> f64 {
    0.5f64.tanh().powi(2) * 0.25 * 3f64.powi(-(d as i32))
}
