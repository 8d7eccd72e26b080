//! Scalar activations and link functions.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::Error;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied activation. `growth` is the polynomial degree bounding
/// `|f(x)|`; without it Gaussian integrals are refused.
#[derive(Clone)]
pub struct CustomActivation {
    pub name: String,
    pub f: ScalarFn,
    pub breakpoints: Vec<f64>,
    pub growth: Option<u32>,
    pub lipschitz: f64,
}

#[derive(Clone)]
pub enum Activation {
    Relu,
    Sigmoid,
    Sign,
    Tanh,
    /// Piecewise-linear sign: -1 below -1/k, +1 above 1/k.
    Lsgn(u32),
    Monomial(u32),
    /// `min(T, relu(x))`.
    TruncatedRelu(f64),
    Custom(CustomActivation),
}

impl Activation {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (1.0 + e)
                }
            }
            Activation::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::Lsgn(k) => (*k as f64 * x).clamp(-1.0, 1.0),
            Activation::Monomial(d) => x.powi(*d as i32),
            Activation::TruncatedRelu(t) => x.max(0.0).min(*t),
            Activation::Custom(c) => (c.f)(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let s = self.eval(x);
                s * (1.0 - s)
            }
            Activation::Sign => 0.0,
            Activation::Tanh => 1.0 - x.tanh().powi(2),
            Activation::Lsgn(k) => {
                let k = *k as f64;
                if x.abs() < 1.0 / k {
                    k
                } else {
                    0.0
                }
            }
            Activation::Monomial(d) => match d {
                0 => 0.0,
                _ => *d as f64 * x.powi(*d as i32 - 1),
            },
            Activation::TruncatedRelu(t) => {
                if x > 0.0 && x < *t {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Custom(c) => {
                let h = 1e-6 * (1.0 + x.abs());
                ((c.f)(x + h) - (c.f)(x - h)) / (2.0 * h)
            }
        }
    }

    /// Lipschitz constant; infinite for discontinuous or superlinear activations.
    pub fn lipschitz(&self) -> f64 {
        match self {
            Activation::Relu => 1.0,
            Activation::Sigmoid => 0.25,
            Activation::Sign => f64::INFINITY,
            Activation::Tanh => 1.0,
            Activation::Lsgn(k) => *k as f64,
            Activation::Monomial(0) => 0.0,
            Activation::Monomial(1) => 1.0,
            Activation::Monomial(_) => f64::INFINITY,
            Activation::TruncatedRelu(_) => 1.0,
            Activation::Custom(c) => c.lipschitz,
        }
    }

    /// `Psi(a) = int_0^a phi`, when a closed form is known.
    pub fn antiderivative(&self, a: f64) -> Option<f64> {
        match self {
            Activation::Relu => Some(0.5 * a.max(0.0).powi(2)),
            Activation::Sigmoid => Some(softplus(a) - std::f64::consts::LN_2),
            Activation::Sign => Some(a.abs()),
            Activation::Tanh => Some(log_cosh(a)),
            Activation::Lsgn(k) => {
                let k = *k as f64;
                if a.abs() <= 1.0 / k {
                    Some(0.5 * k * a * a)
                } else {
                    Some(a.abs() - 0.5 / k)
                }
            }
            Activation::Monomial(d) => Some(a.powi(*d as i32 + 1) / (*d as f64 + 1.0)),
            Activation::TruncatedRelu(t) => {
                let r = a.max(0.0);
                if r <= *t {
                    Some(0.5 * r * r)
                } else {
                    Some(0.5 * t * t + t * (r - t))
                }
            }
            Activation::Custom(_) => None,
        }
    }

    pub fn has_antiderivative(&self) -> bool {
        !matches!(self, Activation::Custom(_))
    }

    /// Points where the activation is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Activation::Relu | Activation::Sign => vec![0.0],
            Activation::Lsgn(k) => vec![-1.0 / *k as f64, 1.0 / *k as f64],
            Activation::TruncatedRelu(t) => vec![0.0, *t],
            Activation::Custom(c) => c.breakpoints.clone(),
            _ => Vec::new(),
        }
    }

    /// Degree of a polynomial bounding `|phi|`; `None` when unknown.
    pub fn growth_degree(&self) -> Option<u32> {
        match self {
            Activation::Relu => Some(1),
            Activation::Monomial(d) => Some(*d),
            Activation::Custom(c) => c.growth,
            _ => Some(0),
        }
    }

    /// Bound on `|phi|` over the real line, if finite.
    pub fn sup_norm(&self) -> Option<f64> {
        match self {
            Activation::Sigmoid | Activation::Sign | Activation::Tanh | Activation::Lsgn(_) => {
                Some(1.0)
            }
            Activation::Monomial(0) => Some(1.0),
            Activation::TruncatedRelu(t) => Some(*t),
            _ => None,
        }
    }

    /// `E[phi(z)^2]` for `z ~ N(0, 1)` where a closed form exists.
    pub fn closed_second_moment(&self) -> Option<f64> {
        match self {
            Activation::Relu => Some(0.5),
            Activation::Sign => Some(1.0),
            Activation::Monomial(d) => Some(double_factorial(2 * *d as i64 - 1)),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Relu => write!(f, "relu"),
            Activation::Sigmoid => write!(f, "sigmoid"),
            Activation::Sign => write!(f, "sign"),
            Activation::Tanh => write!(f, "tanh"),
            Activation::Lsgn(k) => write!(f, "lsgn:{k}"),
            Activation::Monomial(d) => write!(f, "monomial:{d}"),
            Activation::TruncatedRelu(t) => write!(f, "truncrelu:{t}"),
            Activation::Custom(c) => write!(f, "custom:{}", c.name),
        }
    }
}

impl fmt::Debug for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Activation({self})")
    }
}

impl PartialEq for Activation {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Activation::Custom(a), Activation::Custom(b)) => Arc::ptr_eq(&a.f, &b.f),
            (Activation::TruncatedRelu(a), Activation::TruncatedRelu(b)) => a == b,
            (Activation::Lsgn(a), Activation::Lsgn(b)) => a == b,
            (Activation::Monomial(a), Activation::Monomial(b)) => a == b,
            _ => std::mem::discriminant(self) == std::mem::discriminant(other),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let int_arg = |what: &str| -> Result<u32, Error> {
            arg.ok_or_else(|| Error::Usage(format!("{what} needs a parameter, e.g. {what}:4")))?
                .parse::<u32>()
                .map_err(|_| Error::Usage(format!("bad parameter in '{s}'")))
        };
        match head {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "sign" => Ok(Activation::Sign),
            "tanh" => Ok(Activation::Tanh),
            "lsgn" => {
                let k = int_arg("lsgn")?;
                if k == 0 {
                    return Err(Error::Usage("lsgn needs k >= 1".into()));
                }
                Ok(Activation::Lsgn(k))
            }
            "monomial" => Ok(Activation::Monomial(int_arg("monomial")?)),
            "truncrelu" => {
                let t: f64 = arg
                    .and_then(|a| a.parse().ok())
                    .ok_or_else(|| Error::Usage(format!("bad parameter in '{s}'")))?;
                Ok(Activation::TruncatedRelu(t))
            }
            _ => Err(Error::Usage(format!("unknown activation '{s}'"))),
        }
    }
}

fn softplus(a: f64) -> f64 {
    if a > 0.0 {
        a + (-a).exp().ln_1p()
    } else {
        a.exp().ln_1p()
    }
}

fn log_cosh(a: f64) -> f64 {
    let x = a.abs();
    x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2
}

fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}
