//! Acceptance suite: one PASS/FAIL line per criterion.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sqboost::boosting::{run_fw_surrogate, surrogate_gradient, surrogate_loss, FwConfig};
use sqboost::fixtures::{base_learner, boost_fixture, fixture_oracle, lowdeg_fixture, run_boost, BaseKind, BOOST_FIXTURES, GRID_SIZE, LOWDEG_ANGLES};
use sqboost::funcspace::{inner_product, mc_gaussian, norm, FunctionHandle, McConfig, Method};
use sqboost::hard_instance::{default_max_degree, norm_squared_g, trig_power_sum_closed, trig_power_sum_direct, HardInstance};
use sqboost::hermite::{hermite_coefficients_by_quadrature, relu_hermite_coefficient, relu_truncation_bound};
use sqboost::learners::{
    degree_scaling, idealized_grid_learn, ridge_grid, square_loss_grid, BaseLearner, HypothesisClass, LowDegreeLearner,
};
use sqboost::sda_bounds::{
    monomial_class, monomial_norm_lower_bound, regime_check, sda_exact, FiniteClass, GramMethod, RegimeParams,
};
use sqboost::sq_oracle::{simulate_boolean_from_real, LabeledDistribution, OracleConfig, SqAccess, StatOracle, StatQuery};
use sqboost::{Activation, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn plane() -> [Vec<f64>; 2] {
    [vec![1.0, 0.0], vec![0.0, 1.0]]
}

fn unit(t: f64) -> Vec<f64> {
    vec![t.cos(), t.sin()]
}

fn hermite_closed_forms() -> Result<Outcome> {
    let quad = hermite_coefficients_by_quadrature(&Activation::Relu, 20, 64)?;
    let worst = (0..=20)
        .map(|a| (relu_hermite_coefficient(a) - quad.coeffs[a]).abs())
        .fold(0.0, f64::max);
    let a0 = relu_hermite_coefficient(0);
    let a1 = relu_hermite_coefficient(1);
    let odd = (3..=20).step_by(2).all(|a| relu_hermite_coefficient(a) == 0.0);
    let ok = worst < 1e-8 && (a0 - 0.398_942_280_401_432_7).abs() < 1e-15 && a1 == 0.5 && odd;
    Ok(outcome(ok, format!("max |closed - quad| {worst:.2e}, a0 {a0:.9}, a1 {a1}, odd zero {odd}")))
}

fn trig_power_sums() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for m in [2, 4, 8, 16] {
        for a in (0..=64).step_by(2) {
            let d = trig_power_sum_direct(a, m);
            let c = trig_power_sum_closed(a, m);
            worst = worst.max((c - d).abs() / d.abs().max(1.0));
        }
    }
    Ok(outcome(worst <= 1e-9, format!("max relative diff {worst:.2e} over even a <= 64")))
}

fn hard_instance_norms() -> Result<Outcome> {
    let mut lines = Vec::new();
    let mut ok = true;
    let cfg = McConfig::new(1_000_000, 31);
    for (phi, m) in [
        (Activation::Relu, 2),
        (Activation::Relu, 4),
        (Activation::Relu, 8),
        (Activation::Sigmoid, 2),
        (Activation::Sigmoid, 4),
        (Activation::Sigmoid, 8),
    ] {
        let inst = HardInstance::new(m, phi.clone(), Activation::Tanh)?;
        let series = norm_squared_g(&inst, default_max_degree(m))?;
        let mc = mc_gaussian(&cfg, 2, |z| inst.g_planar([z[0], z[1]]).powi(2));
        let diff = (series.value - mc.value).abs();
        let agree = if matches!(phi, Activation::Relu) && m == 2 {
            diff <= 3e-3
        } else {
            diff <= 4.0 * mc.std_error + series.tail_error + 1e-12
        };
        ok &= agree;
        lines.push(format!("{phi} m={m}: {:.6} vs {:.6}", series.value, mc.value));
    }
    let relu2 = norm_squared_g(&HardInstance::new(2, Activation::Relu, Activation::Tanh)?, default_max_degree(2))?.value;
    let literal = (relu2 - 0.125).abs() <= 3e-3;
    lines.push(format!("relu m=2 against 0.125: {}", if literal { "ok" } else { "differs" }));
    Ok(outcome(ok && literal, lines.join("; ")))
}

fn fw_rate() -> Result<Outcome> {
    let mut lines = Vec::new();
    let mut ok = true;
    for name in BOOST_FIXTURES {
        let start = Instant::now();
        let fx = boost_fixture(name, Activation::Tanh)?;
        let run = run_boost(&fx, 50, BaseKind::Grid, fixture_oracle(0))?;
        let mut rate = true;
        let mut slack = f64::INFINITY;
        for r in &run.trace.records {
            let o = r.observation.expect("monitored");
            let bound = 4.0 * fx.psi.lipschitz() * fx.diameter().powi(2) / (r.t as f64 + 2.0);
            rate &= o.gap <= bound + 5.0 * o.gap_std_error;
            slack = slack.min(bound - o.gap);
        }
        let last = run.trace.final_observation().expect("monitored");
        let l2 = last.l2_to_target <= (2.0 * fx.psi.lipschitz() * last.gap.max(0.0)).sqrt() + 5.0 * last.l2_std_error;
        let secs = start.elapsed().as_secs_f64();
        ok &= rate && l2 && secs < 120.0;
        lines.push(format!(
            "{name}: rate {rate}, min slack {slack:.2e}, final l2 {:.3e} <= {:.3e} {l2}, {secs:.1}s",
            last.l2_to_target, last.l2_bound
        ));
    }
    Ok(outcome(ok, lines.join("; ")))
}

fn relu_pair(rng: &mut ChaCha8Rng) -> FunctionHandle {
    let a: f64 = rng.random_range(-0.7..0.7);
    let b: f64 = rng.random_range(-0.7..0.7);
    FunctionHandle::sum(vec![
        FunctionHandle::scaled(a, FunctionHandle::ridge(Activation::Relu, unit(rng.random_range(0.0..6.28)))),
        FunctionHandle::scaled(b, FunctionHandle::ridge(Activation::Relu, unit(rng.random_range(0.0..6.28)))),
    ])
    .expect("same arity")
}

fn gradient_correctness() -> Result<Outcome> {
    let fx = boost_fixture("mixture", Activation::Tanh)?;
    let lambda = fx.psi.lipschitz();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let loss = |f: &FunctionHandle| surrogate_loss(f, &fx.dist, &fx.psi, &Method::Auto).map(|e| e.value);
    let (mut worst_fd, mut sandwich) = (0.0f64, true);
    for _ in 0..20 {
        let f = relu_pair(&mut rng);
        let h = relu_pair(&mut rng);
        let grad = surrogate_gradient(&f, &fx.target, &fx.psi)?;
        let dir = inner_product(&grad, &h, &Method::Quadrature)?;
        let s = 1e-4;
        let plus = FunctionHandle::sum(vec![f.clone(), FunctionHandle::scaled(s, h.clone())])?;
        let minus = FunctionHandle::sum(vec![f.clone(), FunctionHandle::scaled(-s, h.clone())])?;
        let fd = (loss(&plus)? - loss(&minus)?) / (2.0 * s);
        worst_fd = worst_fd.max((fd - dir.value).abs() / 1e-5f64.max(5.0 * dir.std_error));
        let moved = FunctionHandle::sum(vec![f.clone(), h.clone()])?;
        let bregman = loss(&moved)? - loss(&f)? - dir.value;
        let hn = norm(&h, &Method::Auto)?.value;
        sandwich &= bregman >= -1e-12 && bregman <= 0.5 * lambda * hn * hn + 1e-12;
    }
    Ok(outcome(
        worst_fd <= 1.0 && sandwich,
        format!("worst |fd - grad| / tolerance {worst_fd:.3}, sandwich {sandwich}"),
    ))
}

fn low_degree_learner() -> Result<Outcome> {
    let candidates = ridge_grid(&Activation::Relu, 256, &plane(), 1.0);
    let learner = LowDegreeLearner::new(HypothesisClass::ReluUnits, std::f64::consts::FRAC_1_SQRT_2);
    let mut margin = f64::INFINITY;
    for eps in [0.1, 0.05] {
        for &angle in &LOWDEG_ANGLES {
            let d = lowdeg_fixture(angle)?;
            let bench = idealized_grid_learn(&d, &candidates, eps)?;
            let oracle = StatOracle::new(d.clone(), OracleConfig::honest());
            let out = learner.learn(&oracle, eps)?;
            let got = inner_product(&out.hypothesis, d.conditional_mean(), &Method::Quadrature)?;
            margin = margin.min(got.value - (bench.achieved_correlation - eps - 5.0 * got.std_error));
        }
    }
    let deltas = [0.2, 0.1, 0.05, 0.025];
    let (degrees, slope) = degree_scaling(&HypothesisClass::ReluUnits, &deltas)?;
    let in_band = (1.1..=1.6).contains(&slope);
    Ok(outcome(
        margin >= 0.0 && in_band,
        format!("smallest margin over benchmark - eps {margin:.3e}; degrees {degrees:?}, slope {slope:.3} (band [1.1, 1.6])"),
    ))
}

fn reduction_fixtures() -> Result<Vec<LabeledDistribution>> {
    let det = LabeledDistribution::deterministic(
        FunctionHandle::scaled(
            2.0,
            FunctionHandle::composed(Activation::Tanh, FunctionHandle::ridge(Activation::Relu, vec![0.8, -0.6])),
        ),
        2.0,
    )?;
    let hard = HardInstance::new(2, Activation::Relu, Activation::Tanh)?;
    let pc = LabeledDistribution::pconcept(hard.f_handle())?;
    let sign = LabeledDistribution::deterministic(
        FunctionHandle::scaled(1.5, FunctionHandle::ridge(Activation::Sign, vec![0.6, 0.8])),
        1.5,
    )?;
    Ok(vec![det, pc, sign])
}

fn reductions() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst_z: f64 = 0.0;
    for (k, d) in reduction_fixtures()?.iter().enumerate() {
        let c = d.label_bound();
        let p = simulate_boolean_from_real(d)?;
        for i in 0..10u64 {
            let a: [f64; 2] = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
            let b: f64 = rng.random_range(-0.5..0.5);
            let f = move |x: &[f64]| (a[0] * x[0] + a[1] * x[1] + b).tanh();
            let seed = 100 * k as u64 + i;
            let ep = p.expectation_mc(&|x, y| f(x) * y, &McConfig::new(200_000, seed));
            let ed = d.expectation_mc(&|x, y| f(x) * y, &McConfig::new(200_000, seed + 50));
            let sigma = (ep.std_error.powi(2) + (ed.std_error / c).powi(2)).sqrt();
            worst_z = worst_z.max((ep.value - ed.value / c).abs() / sigma);
        }
    }
    let identity = worst_z <= 5.0;

    let mut projection = true;
    for _ in 0..10 {
        let a: f64 = rng.random_range(-1.0..1.0);
        let b: f64 = rng.random_range(-1.0..1.0);
        let f = FunctionHandle::sum(vec![
            FunctionHandle::scaled(a, FunctionHandle::ridge(Activation::Relu, unit(rng.random_range(0.0..6.28)))),
            FunctionHandle::scaled(b, FunctionHandle::ridge(Activation::Relu, unit(rng.random_range(0.0..6.28)))),
        ])?;
        let coarse = square_loss_grid(&f, 128, &plane())?;
        let unit_h = FunctionHandle::scaled(1.0 / coarse.norm, coarse.h_sq.clone());
        let corr = inner_product(&unit_h, &f, &Method::Quadrature)?.value;
        let fine = square_loss_grid(&f, 1024, &plane())?;
        let resolution = 1.0 - (std::f64::consts::PI / 128.0).cos();
        projection &= (coarse.norm - corr.min(1.0)).abs() < 1e-9
            && (fine.norm - coarse.norm).abs() <= 2.0 * resolution * (1.0 + a.abs() + b.abs());
    }

    let mut truncation = true;
    for t in [0.5, 1.0, 2.0, 3.0] {
        let gap = FunctionHandle::sum(vec![
            FunctionHandle::ridge(Activation::Relu, vec![1.0]),
            FunctionHandle::scaled(-1.0, FunctionHandle::ridge(Activation::TruncatedRelu(t), vec![1.0])),
        ])?;
        truncation &= relu_truncation_bound(t) >= norm(&gap, &Method::Quadrature)?.value;
    }
    Ok(outcome(
        identity && projection && truncation,
        format!("boolean identity worst z {worst_z:.2}; projection {projection}; truncation bound {truncation}"),
    ))
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect()
}

fn sda() -> Result<Outcome> {
    let mut mismatches = Vec::new();
    for n in 1..=12 {
        let cls = FiniteClass::from_gram(identity(n))?;
        for gamma in [0.1, 0.25, 0.5] {
            let got = sda_exact(&cls, gamma)?.sda;
            let want = (n as f64 * gamma).floor() as usize;
            if got != want {
                mismatches.push(format!("N={n} g={gamma}: {got} vs {want}"));
            }
        }
    }

    let mut worst_z: f64 = 0.0;
    for n in 1..=5usize {
        for d in 1..=n.min(3) {
            let cls = monomial_class(n, d, true, Some(GramMethod::MonteCarlo(McConfig::new(100_000, (10 * n + d) as u64))))?;
            for i in 0..cls.len() {
                for j in 0..cls.len() {
                    if i != j {
                        worst_z = worst_z.max(cls.gram()[i][j].abs() / cls.gram_std_error()[i][j]);
                    }
                }
            }
        }
    }
    let gram_ok = worst_z <= 5.0;

    let mut pz = true;
    for d in 1..=4u32 {
        let cls = monomial_class(d as usize, d as usize, true, Some(GramMethod::MonteCarlo(McConfig::new(200_000, d as u64))))?;
        pz &= monomial_norm_lower_bound(d) <= cls.gram()[0][0];
    }

    let verdict = |tau, epsilon, beta| -> Vec<bool> {
        regime_check(&RegimeParams { tau, epsilon, beta }).constraints.iter().map(|c| c.holds).collect()
    };
    let regime = verdict(0.01, 0.1, 0.5) == [true, true, true]
        && verdict(0.2, 0.1, 0.5) == [false, true, false]
        && verdict(0.01, 0.4, 0.5) == [true, false, true];

    let floor_ok = mismatches.is_empty();
    Ok(outcome(
        floor_ok && gram_ok && pz && regime,
        format!(
            "floor(N gamma) mismatches {} [{}]; gram worst z {worst_z:.2}; paley-zygmund {pz}; regime verdicts {regime}",
            mismatches.len(),
            mismatches.join(", ")
        ),
    ))
}

static INSIDE: AtomicUsize = AtomicUsize::new(0);
static LEAKS: AtomicUsize = AtomicUsize::new(0);
static READS: AtomicUsize = AtomicUsize::new(0);

/// Forwards to an oracle, marking the span during which the oracle runs.
struct Fenced<'a>(&'a StatOracle);

impl Fenced<'_> {
    fn fenced<T>(&self, f: impl FnOnce() -> T) -> T {
        INSIDE.fetch_add(1, Ordering::SeqCst);
        let out = f();
        INSIDE.fetch_sub(1, Ordering::SeqCst);
        out
    }
}

impl SqAccess for Fenced<'_> {
    fn query(&self, q: &StatQuery) -> Result<f64> {
        self.fenced(|| self.0.query(q))
    }

    fn query_batch(&self, qs: &[StatQuery]) -> Result<Vec<f64>> {
        self.fenced(|| self.0.query_batch(qs))
    }

    fn dimension(&self) -> usize {
        self.0.dimension()
    }

    fn label_bound(&self) -> f64 {
        self.0.label_bound()
    }
}

fn sq_purity() -> Result<Outcome> {
    let fx = boost_fixture("mixture", Activation::Tanh)?;
    let mean = fx.dist.conditional_mean().clone();
    let hints = mean.hints();
    let watched = Arc::new(move |x: &[f64]| {
        READS.fetch_add(1, Ordering::Relaxed);
        if INSIDE.load(Ordering::SeqCst) == 0 {
            LEAKS.fetch_add(1, Ordering::Relaxed);
        }
        mean.eval(x)
    });
    let dist = LabeledDistribution::pconcept(FunctionHandle::opaque_with_hints(2, hints, move |x| watched(x)))?;
    READS.store(0, Ordering::SeqCst);
    LEAKS.store(0, Ordering::SeqCst);

    let oracle = StatOracle::new(dist, fixture_oracle(0));
    let learner = base_learner(&fx, BaseKind::Grid)?;
    let config = FwConfig::new(20, fx.diameter());
    let trace = run_fw_surrogate(&Fenced(&oracle), learner.as_ref(), &fx.psi, &config, None)?;
    let reads = READS.load(Ordering::SeqCst);
    let leaks = LEAKS.load(Ordering::SeqCst);
    let predicted = learner.queries_per_call().map(|q| q * 21);
    let count = oracle.query_count();
    let ok = leaks == 0 && reads > 0 && predicted == Some(count) && count == 21 * GRID_SIZE && trace.base_calls == 21;
    Ok(outcome(
        ok,
        format!("{reads} reads of the conditional mean, {leaks} outside the oracle; ledger {count}, predicted {predicted:?}"),
    ))
}

fn main() {
    let criteria: [(&str, f64, fn() -> Result<Outcome>); 9] = [
        ("hermite closed forms", 1.0, hermite_closed_forms),
        ("trig power sums", 1.0, trig_power_sums),
        ("hard-instance norm", 30.0, hard_instance_norms),
        ("frank-wolfe rate", 360.0, fw_rate),
        ("gradient correctness", 60.0, gradient_correctness),
        ("low-degree learner", 300.0, low_degree_learner),
        ("reductions", 120.0, reductions),
        ("sda", 120.0, sda),
        ("sq purity", f64::INFINITY, sq_purity),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && secs < *budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        let limit = if budget.is_finite() { format!(", budget {budget}s") } else { String::new() };
        println!("{} {}. {name} ({secs:.2}s{limit}): {detail}", if passed { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
}
