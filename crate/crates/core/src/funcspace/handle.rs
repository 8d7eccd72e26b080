use std::fmt;
use std::sync::Arc;

use crate::activation::Activation;
use crate::error::{Error, Result};

use super::multi_index::HermitePolynomial;

pub type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A non-smooth locus `<normal, x> = offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kink {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// What an integrator may assume about a function of `x in R^n`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Hints {
    /// The function depends on `x` only through these directions.
    /// `None` means unknown.
    pub directions: Option<Vec<Vec<f64>>>,
    pub kinks: Vec<Kink>,
    /// Polynomial growth degree, `None` when unknown.
    pub growth: Option<u32>,
}

impl Hints {
    pub fn none() -> Self {
        Self {
            directions: None,
            kinks: Vec::new(),
            growth: None,
        }
    }

    pub fn constant() -> Self {
        Self {
            directions: Some(Vec::new()),
            kinks: Vec::new(),
            growth: Some(0),
        }
    }

    /// Hints for a product or any other pointwise combination.
    pub fn combine(&self, other: &Hints) -> Hints {
        let directions = match (&self.directions, &other.directions) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        let growth = match (self.growth, other.growth) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Hints {
            directions,
            kinks: self.kinks.iter().chain(&other.kinks).cloned().collect(),
            growth,
        }
    }
}

#[derive(Clone)]
pub enum Structure {
    Constant(f64),
    Ridge { activation: Activation, weight: Vec<f64> },
    Scaled { factor: f64, inner: FunctionHandle },
    Sum(Vec<FunctionHandle>),
    Composed { outer: Activation, inner: FunctionHandle },
    Polynomial(HermitePolynomial),
    Opaque { f: PointFn, hints: Hints },
}

struct Node {
    arity: usize,
    norm_hint: Option<f64>,
    structure: Structure,
}

/// A function `R^n -> R`, cheap to clone and share.
#[derive(Clone)]
pub struct FunctionHandle(Arc<Node>);

impl FunctionHandle {
    fn build(arity: usize, norm_hint: Option<f64>, structure: Structure) -> Self {
        Self(Arc::new(Node {
            arity,
            norm_hint,
            structure,
        }))
    }

    pub fn zero(arity: usize) -> Self {
        Self::build(arity, Some(0.0), Structure::Constant(0.0))
    }

    pub fn constant(arity: usize, c: f64) -> Self {
        Self::build(arity, Some(c.abs()), Structure::Constant(c))
    }

    /// `x -> activation(<weight, x>)`.
    pub fn ridge(activation: Activation, weight: Vec<f64>) -> Self {
        let arity = weight.len();
        let scale = weight.iter().map(|w| w * w).sum::<f64>().sqrt();
        let hint = match activation {
            Activation::Relu => Some(scale / 2f64.sqrt()),
            Activation::Sign if scale > 0.0 => Some(1.0),
            _ => None,
        };
        Self::build(arity, hint, Structure::Ridge { activation, weight })
    }

    pub fn scaled(factor: f64, inner: FunctionHandle) -> Self {
        let hint = inner.norm_hint().map(|n| n * factor.abs());
        Self::build(inner.arity(), hint, Structure::Scaled { factor, inner })
    }

    pub fn sum(terms: Vec<FunctionHandle>) -> Result<Self> {
        let arity = terms
            .first()
            .map(|t| t.arity())
            .ok_or_else(|| Error::Contract("sum of no functions".into()))?;
        for t in &terms {
            if t.arity() != arity {
                return Err(Error::Arity {
                    expected: arity,
                    got: t.arity(),
                });
            }
        }
        Ok(Self::build(arity, None, Structure::Sum(terms)))
    }

    pub fn composed(outer: Activation, inner: FunctionHandle) -> Self {
        Self::build(inner.arity(), None, Structure::Composed { outer, inner })
    }

    pub fn polynomial(poly: HermitePolynomial) -> Self {
        let hint = poly.exact_norm();
        Self::build(poly.arity(), hint, Structure::Polynomial(poly))
    }

    pub fn opaque(arity: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::opaque_with_hints(arity, Hints::none(), f)
    }

    pub fn opaque_with_hints(
        arity: usize,
        hints: Hints,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::build(
            arity,
            None,
            Structure::Opaque {
                f: Arc::new(f),
                hints,
            },
        )
    }

    pub fn with_norm_hint(&self, norm: f64) -> Self {
        Self::build(self.arity(), Some(norm), self.0.structure.clone())
    }

    pub fn arity(&self) -> usize {
        self.0.arity
    }

    pub fn norm_hint(&self) -> Option<f64> {
        self.0.norm_hint
    }

    pub fn structure(&self) -> &Structure {
        &self.0.structure
    }

    pub fn ptr_eq(&self, other: &FunctionHandle) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.arity());
        match &self.0.structure {
            Structure::Constant(c) => *c,
            Structure::Ridge { activation, weight } => activation.eval(dot(weight, x)),
            Structure::Scaled { factor, inner } => factor * inner.eval(x),
            Structure::Sum(terms) => terms.iter().fold(0.0, |acc, t| acc + t.eval(x)),
            Structure::Composed { outer, inner } => outer.eval(inner.eval(x)),
            Structure::Polynomial(p) => p.eval(x),
            Structure::Opaque { f, .. } => f(x),
        }
    }

    pub fn try_eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.arity() {
            return Err(Error::Arity {
                expected: self.arity(),
                got: x.len(),
            });
        }
        Ok(self.eval(x))
    }

    pub fn hints(&self) -> Hints {
        match &self.0.structure {
            Structure::Constant(_) => Hints::constant(),
            Structure::Ridge { activation, weight } => Hints {
                directions: Some(vec![weight.clone()]),
                kinks: activation
                    .breakpoints()
                    .into_iter()
                    .map(|b| Kink {
                        normal: weight.clone(),
                        offset: b,
                    })
                    .collect(),
                growth: activation.growth_degree(),
            },
            Structure::Scaled { inner, .. } => inner.hints(),
            Structure::Sum(terms) => {
                let mut acc = Hints::constant();
                for t in terms {
                    let h = t.hints();
                    let growth = match (acc.growth, h.growth) {
                        (Some(a), Some(b)) => Some(a.max(b)),
                        _ => None,
                    };
                    acc = acc.combine(&h);
                    acc.growth = growth;
                }
                acc
            }
            Structure::Composed { outer, inner } => {
                let mut h = inner.hints();
                h.growth = match (outer.sup_norm(), outer.growth_degree(), h.growth) {
                    (Some(_), _, _) => Some(0),
                    (None, Some(a), Some(b)) => Some(a * b),
                    _ => None,
                };
                h
            }
            Structure::Polynomial(p) => p.hints(),
            Structure::Opaque { hints, .. } => hints.clone(),
        }
    }
}

impl fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.structure {
            Structure::Constant(c) => write!(f, "const({c})"),
            Structure::Ridge { activation, weight } => write!(f, "{activation}(<{weight:?}, x>)"),
            Structure::Scaled { factor, inner } => write!(f, "{factor}*{inner:?}"),
            Structure::Sum(t) => write!(f, "sum[{} terms]", t.len()),
            Structure::Composed { outer, inner } => write!(f, "{outer}({inner:?})"),
            Structure::Polynomial(p) => write!(f, "poly[{} terms]", p.terms().len()),
            Structure::Opaque { .. } => write!(f, "opaque(n={})", self.arity()),
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}
