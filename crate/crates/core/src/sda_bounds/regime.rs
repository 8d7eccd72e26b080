use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeParams {
    pub tau: f64,
    pub epsilon: f64,
    /// Lower bound on the norms of class members.
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: &'static str,
    pub holds: bool,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub constraints: Vec<Constraint>,
    pub valid: bool,
}

/// Checks the parameter regime in which correlational lower bounds apply.
pub fn regime_check(p: &RegimeParams) -> RegimeReport {
    let constraints = vec![
        Constraint {
            name: "tau <= eps^2",
            holds: p.tau <= p.epsilon * p.epsilon * (1.0 + 1e-12),
            reason: "queries must be too coarse to resolve squared-accuracy differences",
        },
        Constraint {
            name: "eps <= beta/3",
            holds: p.epsilon <= p.beta / 3.0 * (1.0 + 1e-12),
            reason: "the target accuracy must be small against the norm of every class member",
        },
        Constraint {
            name: "tau < eps",
            holds: p.tau < p.epsilon,
            reason: "with tau >= eps a single query decides the problem",
        },
    ];
    let valid = constraints.iter().all(|c| c.holds);
    RegimeReport { constraints, valid }
}

pub type DecayFn = Arc<dyn Fn(u32) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Family {
    Relu,
    Sigmoid,
    Halfspace,
    Monomial(u32),
    /// `beta(k)`: norm of the degree-`k` part of the activation.
    Custom(DecayFn),
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Relu => write!(f, "relu"),
            Family::Sigmoid => write!(f, "sigmoid"),
            Family::Halfspace => write!(f, "halfspace"),
            Family::Monomial(d) => write!(f, "monomial({d})"),
            Family::Custom(_) => write!(f, "custom"),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Family::Relu),
            "sigmoid" => Ok(Family::Sigmoid),
            "halfspace" => Ok(Family::Halfspace),
            _ => match s.strip_prefix("monomial:") {
                Some(d) => d
                    .parse()
                    .map(Family::Monomial)
                    .map_err(|_| Error::Usage(format!("bad degree in '{s}'"))),
                None => Err(Error::Usage(format!("unknown family '{s}'"))),
            },
        }
    }
}

/// Parameter choices behind a query lower bound. Hidden constants are one.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBound {
    pub k: f64,
    /// `tau = n^{tau_exponent}`.
    pub tau_exponent: f64,
    pub description: String,
}

const SEARCH_LIMIT: u32 = 1_000_000;

fn snap(k: f64) -> f64 {
    if (k - k.round()).abs() < 1e-9 {
        k.round()
    } else {
        k
    }
}

pub fn lower_bound_calculator(family: &Family, epsilon: f64) -> Result<LowerBound> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Contract(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let (k, description) = match family {
        Family::Relu => (epsilon.powf(-1.0 / 12.0), "q >= 2^{n^c} eps with k = eps^{-1/12} (order only)".to_string()),
        Family::Sigmoid => ((1.0 / epsilon).ln().powi(2), "q >= 2^{n^c} eps with k = (ln 1/eps)^2 (order only)".to_string()),
        Family::Halfspace => (1.0 / epsilon, "q >= 2^{n^c} eps with k = 1/eps (order only)".to_string()),
        Family::Monomial(d) => (*d as f64, format!("q >= n^{{{d}}} tau^{{5/2}} (order only)")),
        Family::Custom(beta) => {
            let mut best = None;
            for k in 1..=SEARCH_LIMIT {
                if beta(k) >= epsilon {
                    best = Some(k);
                } else if best.is_some() {
                    break;
                }
            }
            let inv = best.ok_or_else(|| Error::Range(format!("beta(k) < {epsilon} for every k <= {SEARCH_LIMIT}")))?;
            (3.0 * inv as f64, "q >= 2^{n^c} eps with k = 3 beta^{-1}(eps) (order only)".to_string())
        }
    };
    let k = snap(k);
    Ok(LowerBound {
        k,
        tau_exponent: -k,
        description,
    })
}
