//! Named problem instances shared by the experiments, tests and demo.

use crate::activation::Activation;
use crate::boosting::{run_fw_surrogate, FwConfig, FwTrace, GapMonitor};
use crate::error::{Error, Result};
use crate::funcspace::{FunctionHandle, Method};
use crate::quadrature::PolarSpec;
use crate::learners::{signed_ridge_grid, BaseLearner, GridLearner, HypothesisClass, LowDegreeLearner};
use crate::sq_oracle::{LabeledDistribution, OracleConfig, QueryLedger, StatOracle};

pub const BOOST_FIXTURES: [&str; 3] = ["realizable", "midpoint", "mixture"];
pub const GRID_SIZE: usize = 64;

fn plane() -> [Vec<f64>; 2] {
    [vec![1.0, 0.0], vec![0.0, 1.0]]
}

/// A p-concept with mean `psi(f*)`, where `f*` is a convex combination of
/// atoms from a signed grid of relu units on the plane.
#[derive(Debug, Clone)]
pub struct BoostFixture {
    pub name: String,
    pub target: FunctionHandle,
    pub candidates: Vec<FunctionHandle>,
    pub psi: Activation,
    pub radius: f64,
    pub dist: LabeledDistribution,
}

impl BoostFixture {
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }
}

pub fn boost_fixture(name: &str, psi: Activation) -> Result<BoostFixture> {
    let candidates = signed_ridge_grid(&Activation::Relu, GRID_SIZE, &plane(), 1.0);
    let mix: &[(f64, usize)] = match name {
        "realizable" => &[(1.0, 10)],
        "midpoint" => &[(0.5, 4), (0.5, 19)],
        "mixture" => &[(0.4, 2), (0.3, 15), (0.2, 33), (0.1, 50)],
        _ => return Err(Error::Usage(format!("unknown fixture '{name}', expected one of {BOOST_FIXTURES:?}"))),
    };
    let target = FunctionHandle::sum(
        mix.iter()
            .map(|&(w, i)| FunctionHandle::scaled(w, candidates[i].clone()))
            .collect(),
    )?;
    let dist = LabeledDistribution::pconcept(FunctionHandle::composed(psi.clone(), target.clone()))?;
    Ok(BoostFixture {
        name: name.to_string(),
        target,
        candidates,
        psi,
        radius: std::f64::consts::FRAC_1_SQRT_2,
        dist,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseKind {
    Grid,
    LowDegree,
}

impl std::str::FromStr for BaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(BaseKind::Grid),
            "lowdeg" => Ok(BaseKind::LowDegree),
            _ => Err(Error::Usage(format!("unknown base learner '{s}', expected grid or lowdeg"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoostRun {
    pub trace: FwTrace,
    pub ledger: QueryLedger,
    /// Query count implied by the learner, when it is fixed per call.
    pub predicted_queries: Option<usize>,
}

pub fn base_learner(fixture: &BoostFixture, base: BaseKind) -> Result<Box<dyn BaseLearner>> {
    Ok(match base {
        BaseKind::Grid => Box::new(GridLearner::new(fixture.candidates.clone(), fixture.radius)?),
        BaseKind::LowDegree => {
            let mut l = LowDegreeLearner::new(HypothesisClass::ReluUnits, fixture.radius);
            l.tau_floor = 1e-10;
            Box::new(l)
        }
    })
}

/// Honest oracle integrating with the lighter polar rule, which suffices for
/// the ridge integrands of the boosting fixtures.
pub fn fixture_oracle(seed: u64) -> OracleConfig {
    OracleConfig::honest().with_seed(seed).with_polar_spec(PolarSpec::coarse())
}

/// Boosts on `fixture`, with a monitor measuring gaps against the target.
pub fn run_boost(fixture: &BoostFixture, iterations: usize, base: BaseKind, oracle: OracleConfig) -> Result<BoostRun> {
    let learner = base_learner(fixture, base)?;
    let access = StatOracle::new(fixture.dist.clone(), oracle);
    let mut monitor = GapMonitor::new(fixture.target.clone(), fixture.psi.clone(), Method::Auto);
    let config = FwConfig::new(iterations, fixture.diameter());
    let trace = run_fw_surrogate(&access, learner.as_ref(), &fixture.psi, &config, Some(&mut monitor))?;
    Ok(BoostRun {
        predicted_queries: learner.queries_per_call().map(|q| q * (iterations + 1)),
        ledger: access.ledger(),
        trace,
    })
}

/// A relu unit `min(1, relu(<w, x>))` with `||w|| = 1/4` at `angle`, as
/// deterministic labels bounded by one.
pub fn lowdeg_fixture(angle: f64) -> Result<LabeledDistribution> {
    let w = vec![0.25 * angle.cos(), 0.25 * angle.sin()];
    LabeledDistribution::deterministic(FunctionHandle::ridge(Activation::TruncatedRelu(1.0), w), 1.0)
}

/// Angles of the low-degree benchmark fixtures.
pub const LOWDEG_ANGLES: [f64; 3] = [0.3, 1.9, 4.4];
