use std::fmt;
use std::path::Path;
use std::sync::Mutex;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::funcspace::{gaussian_quadrature, Estimate, FunctionHandle, McConfig, DEFAULT_SEED};
use crate::quadrature::PolarSpec;

use super::distribution::LabeledDistribution;
use super::query::{rewrite_query_for_residual, StatQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryMode {
    Honest,
    /// Adds `u ~ Uniform[-tau, tau]` from a per-query stream.
    SeededUniform,
    /// Rounds to the nearest multiple of `tau`.
    GridRounding,
}

impl AdversaryMode {
    pub fn tag(&self) -> &'static str {
        match self {
            AdversaryMode::Honest => "honest",
            AdversaryMode::SeededUniform => "seeded_uniform",
            AdversaryMode::GridRounding => "grid_rounding",
        }
    }
}

impl std::str::FromStr for AdversaryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "honest" => Ok(AdversaryMode::Honest),
            "seeded_uniform" | "uniform" => Ok(AdversaryMode::SeededUniform),
            "grid_rounding" | "grid" => Ok(AdversaryMode::GridRounding),
            _ => Err(Error::Usage(format!("unknown adversary mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Estimation {
    /// Quadrature when the integrand lives on at most two directions,
    /// otherwise Monte Carlo with `fallback` (its seed is replaced per query).
    QuadratureWhenPossible {
        spec: Option<PolarSpec>,
        fallback: McConfig,
    },
    /// Monte Carlo with a per-query seed.
    MonteCarlo { samples: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub mode: AdversaryMode,
    pub estimation: Estimation,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            mode: AdversaryMode::Honest,
            estimation: Estimation::QuadratureWhenPossible {
                spec: None,
                fallback: McConfig::default(),
            },
            seed: DEFAULT_SEED,
        }
    }
}

impl OracleConfig {
    pub fn honest() -> Self {
        Self::default()
    }

    pub fn with_mode(mut self, mode: AdversaryMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_polar_spec(mut self, spec: PolarSpec) -> Self {
        if let Estimation::QuadratureWhenPossible { spec: s, .. } = &mut self.estimation {
            *s = Some(spec);
        }
        self
    }

    /// Sample budget for queries that cannot be integrated by quadrature.
    pub fn with_samples(mut self, samples: usize) -> Self {
        match &mut self.estimation {
            Estimation::QuadratureWhenPossible { fallback, .. } => fallback.samples = samples,
            Estimation::MonteCarlo { samples: s } => *s = samples,
        }
        self
    }

    pub fn monte_carlo(samples: usize) -> Self {
        Self {
            estimation: Estimation::MonteCarlo { samples },
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerEntry {
    pub ordinal: u64,
    pub tolerance: f64,
    pub mode: AdversaryMode,
    pub answer: f64,
    pub std_error: f64,
}

/// Record of answered queries.
#[derive(Debug, Clone, Default)]
pub struct QueryLedger {
    entries: Vec<LedgerEntry>,
    next_ordinal: u64,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    /// Smallest tolerance used so far; `+inf` when empty.
    pub fn min_tolerance_used(&self) -> f64 {
        self.entries.iter().map(|e| e.tolerance).fold(f64::INFINITY, f64::min)
    }

    fn reserve(&mut self) -> u64 {
        let o = self.next_ordinal;
        self.next_ordinal += 1;
        o
    }

    fn record(&mut self, entry: LedgerEntry) {
        let at = self.entries.partition_point(|e| e.ordinal < entry.ordinal);
        self.entries.insert(at, entry);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let rows: Vec<Vec<String>> = self
            .entries
            .iter()
            .map(|e| {
                vec![
                    e.ordinal.to_string(),
                    crate::cli::fmt_f64(e.tolerance),
                    e.mode.tag().to_string(),
                    crate::cli::fmt_f64(e.answer),
                    crate::cli::fmt_f64(e.std_error),
                ]
            })
            .collect();
        crate::cli::emit_csv(
            path,
            &["ordinal", "tolerance", "adversary_mode", "answer", "est_stderr"],
            &rows,
        )
    }
}

/// `sum_i 1 / tau_i^2` over logged queries.
pub fn implied_sample_complexity(ledger: &QueryLedger) -> f64 {
    ledger.entries.iter().map(|e| 1.0 / (e.tolerance * e.tolerance)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleAnswer {
    pub value: f64,
    /// The oracle's estimate of the true expectation.
    pub truth: Estimate,
    /// `value - truth.value`.
    pub perturbation: f64,
    pub ordinal: u64,
}

fn query_stream(seed: u64, ordinal: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ordinal);
    rng
}

/// Answers one query without touching a ledger.
pub fn evaluate_query(
    dist: &LabeledDistribution,
    query: &StatQuery,
    config: &OracleConfig,
    ordinal: u64,
) -> Result<OracleAnswer> {
    let tau = query.tolerance;
    if !(tau > 0.0) {
        return Err(Error::Contract(format!("tolerance must be positive, got {tau}")));
    }
    if dist.dimension() == 0 {
        return Err(Error::Contract("distribution has dimension zero".into()));
    }
    let mut stream = query_stream(config.seed, ordinal);
    let mc_seed = stream.next_u64();
    let phi = |x: &[f64], y: f64| query.eval(x, y);
    let truth = match &config.estimation {
        Estimation::QuadratureWhenPossible { spec, fallback } => {
            let hints = dist.hints().combine(&query.hints);
            match gaussian_quadrature(
                dist.dimension(),
                &hints,
                &|x| dist.conditional_expectation(&phi, x),
                spec.as_ref(),
            ) {
                Ok(v) => Estimate::exact(v),
                Err(Error::Unsupported(_)) => dist.expectation_mc(&phi, &McConfig { seed: mc_seed, ..*fallback }),
                Err(e) => return Err(e),
            }
        }
        Estimation::MonteCarlo { samples } => dist.expectation_mc(&phi, &McConfig::new(*samples, mc_seed)),
    };
    if truth.std_error > tau / 10.0 {
        return Err(Error::Resolution {
            tau,
            std_error: truth.std_error,
        });
    }
    let value = match config.mode {
        AdversaryMode::Honest => truth.value,
        AdversaryMode::SeededUniform => truth.value + stream.random_range(-tau..=tau),
        AdversaryMode::GridRounding => (truth.value / tau).round() * tau,
    };
    Ok(OracleAnswer {
        value,
        truth,
        perturbation: value - truth.value,
        ordinal,
    })
}

/// Answers `query` and logs it in `ledger`.
pub fn answer_query(
    dist: &LabeledDistribution,
    query: &StatQuery,
    config: &OracleConfig,
    ledger: &mut QueryLedger,
) -> Result<OracleAnswer> {
    let ordinal = ledger.reserve();
    let ans = evaluate_query(dist, query, config, ordinal)?;
    ledger.record(LedgerEntry {
        ordinal,
        tolerance: query.tolerance,
        mode: config.mode,
        answer: ans.value,
        std_error: ans.truth.std_error,
    });
    Ok(ans)
}

/// Statistical-query access to an unseen labeled distribution.
pub trait SqAccess: Sync {
    fn query(&self, q: &StatQuery) -> Result<f64>;
    /// Answers in order; the default asks one query at a time.
    fn query_batch(&self, qs: &[StatQuery]) -> Result<Vec<f64>> {
        qs.iter().map(|q| self.query(q)).collect()
    }
    fn dimension(&self) -> usize;
    /// Bound on `|y|`.
    fn label_bound(&self) -> f64;
}

/// The STAT oracle. The distribution is private: callers only see answers.
pub struct StatOracle {
    dist: LabeledDistribution,
    config: OracleConfig,
    ledger: Mutex<QueryLedger>,
}

impl StatOracle {
    pub fn new(dist: LabeledDistribution, config: OracleConfig) -> Self {
        Self {
            dist,
            config,
            ledger: Mutex::new(QueryLedger::new()),
        }
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    pub fn answer(&self, q: &StatQuery) -> Result<OracleAnswer> {
        let ordinal = self.ledger.lock().expect("ledger poisoned").reserve();
        let ans = evaluate_query(&self.dist, q, &self.config, ordinal)?;
        self.ledger.lock().expect("ledger poisoned").record(LedgerEntry {
            ordinal,
            tolerance: q.tolerance,
            mode: self.config.mode,
            answer: ans.value,
            std_error: ans.truth.std_error,
        });
        Ok(ans)
    }

    /// Answers a batch with consecutive ordinals. Evaluation may run in
    /// parallel; the ledger is identical to answering one at a time.
    pub fn answer_batch(&self, qs: &[StatQuery]) -> Result<Vec<OracleAnswer>> {
        let first = {
            let mut ledger = self.ledger.lock().expect("ledger poisoned");
            let first = ledger.next_ordinal;
            ledger.next_ordinal += qs.len() as u64;
            first
        };
        let eval = |(i, q): (usize, &StatQuery)| evaluate_query(&self.dist, q, &self.config, first + i as u64);
        #[cfg(feature = "parallel")]
        let answers: Vec<Result<OracleAnswer>> = {
            use rayon::prelude::*;
            qs.par_iter().enumerate().map(eval).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let answers: Vec<Result<OracleAnswer>> = qs.iter().enumerate().map(eval).collect();
        let mut out = Vec::with_capacity(qs.len());
        let mut ledger = self.ledger.lock().expect("ledger poisoned");
        for (q, a) in qs.iter().zip(answers) {
            let a = a?;
            ledger.record(LedgerEntry {
                ordinal: a.ordinal,
                tolerance: q.tolerance,
                mode: self.config.mode,
                answer: a.value,
                std_error: a.truth.std_error,
            });
            out.push(a);
        }
        Ok(out)
    }

    pub fn ledger(&self) -> QueryLedger {
        self.ledger.lock().expect("ledger poisoned").clone()
    }

    pub fn query_count(&self) -> usize {
        self.ledger.lock().expect("ledger poisoned").count()
    }
}

impl fmt::Debug for StatOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StatOracle")
            .field("dimension", &self.dist.dimension())
            .field("config", &self.config)
            .field("queries", &self.query_count())
            .finish()
    }
}

impl SqAccess for StatOracle {
    fn query(&self, q: &StatQuery) -> Result<f64> {
        self.answer(q).map(|a| a.value)
    }

    fn query_batch(&self, qs: &[StatQuery]) -> Result<Vec<f64>> {
        Ok(self.answer_batch(qs)?.into_iter().map(|a| a.value).collect())
    }

    fn dimension(&self) -> usize {
        self.dist.dimension()
    }

    fn label_bound(&self) -> f64 {
        self.dist.label_bound()
    }
}

/// Access to the residual distribution with labels `y - psi(f(x))`, built
/// from access to the original labels by rewriting queries.
pub struct ResidualAccess<'a, A: SqAccess + ?Sized> {
    inner: &'a A,
    current: FunctionHandle,
    psi: Activation,
}

impl<'a, A: SqAccess + ?Sized> ResidualAccess<'a, A> {
    pub fn new(inner: &'a A, current: FunctionHandle, psi: Activation) -> Self {
        Self { inner, current, psi }
    }
}

impl<A: SqAccess + ?Sized> SqAccess for ResidualAccess<'_, A> {
    fn query(&self, q: &StatQuery) -> Result<f64> {
        self.inner.query(&rewrite_query_for_residual(q, &self.current, &self.psi))
    }

    fn query_batch(&self, qs: &[StatQuery]) -> Result<Vec<f64>> {
        let rewritten: Vec<StatQuery> = qs
            .iter()
            .map(|q| rewrite_query_for_residual(q, &self.current, &self.psi))
            .collect();
        self.inner.query_batch(&rewritten)
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn label_bound(&self) -> f64 {
        self.inner.label_bound() + self.psi.sup_norm().unwrap_or(f64::INFINITY)
    }
}

/// Access to the p-concept with mean `E[y | x] / C`, built from real-label
/// access by answering each query with two half-tolerance queries.
pub struct BooleanAccess<'a, A: SqAccess + ?Sized> {
    inner: &'a A,
}

impl<'a, A: SqAccess + ?Sized> BooleanAccess<'a, A> {
    pub fn new(inner: &'a A) -> Result<Self> {
        let c = inner.label_bound();
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Contract(format!("label bound must be positive and finite, got {c}")));
        }
        Ok(Self { inner })
    }
}

impl<A: SqAccess + ?Sized> SqAccess for BooleanAccess<'_, A> {
    fn query(&self, q: &StatQuery) -> Result<f64> {
        let c = self.inner.label_bound();
        let half = q.tolerance / 2.0;
        let (p1, p2) = (q.clone(), q.clone());
        let even = StatQuery::new(half, move |x, _| 0.5 * (p1.eval(x, 1.0) + p1.eval(x, -1.0)))
            .with_hints(q.hints.clone())
            .with_label(format!("bool_even({})", q.label));
        let odd = StatQuery::new(half, move |x, y| (p2.eval(x, 1.0) - p2.eval(x, -1.0)) * y / (2.0 * c))
            .with_hints(q.hints.clone())
            .with_label(format!("bool_odd({})", q.label));
        Ok(self.inner.query(&even)? + self.inner.query(&odd)?)
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn label_bound(&self) -> f64 {
        1.0
    }
}
