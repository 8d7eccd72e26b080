use std::fmt;
use std::sync::Arc;

use crate::activation::Activation;
use crate::funcspace::{FunctionHandle, Hints};

pub type QueryFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// A bounded query `phi(x, y)` with its tolerance. Values are clipped to
/// `[-1, 1]` whenever the query is evaluated.
#[derive(Clone)]
pub struct StatQuery {
    f: QueryFn,
    pub tolerance: f64,
    /// Structure of `phi` in `x`, used to choose quadrature.
    pub hints: Hints,
    pub label: String,
}

impl StatQuery {
    pub fn new(tolerance: f64, f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            tolerance,
            hints: Hints::none(),
            label: String::new(),
        }
    }

    pub fn with_hints(mut self, hints: Hints) -> Self {
        self.hints = hints;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn raw(&self) -> &QueryFn {
        &self.f
    }

    pub fn eval(&self, x: &[f64], y: f64) -> f64 {
        let v = (self.f)(x, y);
        if v.is_nan() {
            0.0
        } else {
            v.clamp(-1.0, 1.0)
        }
    }

    /// `(x, y) -> clip(scale * h(x) * y)`.
    pub fn correlation(h: FunctionHandle, scale: f64, tolerance: f64) -> Self {
        let hints = h.hints();
        Self::new(tolerance, move |x, y| scale * h.eval(x) * y)
            .with_hints(hints)
            .with_label("correlation")
    }
}

impl fmt::Debug for StatQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StatQuery")
            .field("tolerance", &self.tolerance)
            .field("label", &self.label)
            .finish()
    }
}

/// `phi'(x, y) = phi(x, y - psi(f(x)))`: asking `phi'` about labels `y`
/// is asking `phi` about the residual labels.
pub fn rewrite_query_for_residual(query: &StatQuery, current_f: &FunctionHandle, psi: &Activation) -> StatQuery {
    let inner = query.clone();
    let f = current_f.clone();
    let psi = psi.clone();
    let hints = query.hints.combine(&f.hints());
    StatQuery {
        f: Arc::new(move |x, y| inner.eval(x, y - psi.eval(f.eval(x)))),
        tolerance: query.tolerance,
        hints: Hints {
            growth: query.hints.growth,
            ..hints
        },
        label: format!("residual({})", query.label),
    }
}
