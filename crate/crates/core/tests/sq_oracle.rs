use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sqboost::funcspace::{FunctionHandle, Hints, McConfig};
use sqboost::hard_instance::HardInstance;
use sqboost::sq_oracle::*;
use sqboost::{Activation, Error};

fn fixtures() -> Vec<LabeledDistribution> {
    let det = LabeledDistribution::deterministic(
        FunctionHandle::scaled(2.0, FunctionHandle::composed(Activation::Tanh, FunctionHandle::ridge(Activation::Relu, vec![0.8, -0.6]))),
        2.0,
    )
    .unwrap();
    let hard = HardInstance::new(2, Activation::Relu, Activation::Tanh).unwrap();
    let pc = LabeledDistribution::pconcept(hard.f_handle()).unwrap();
    let half = LabeledDistribution::pconcept(FunctionHandle::scaled(0.8, FunctionHandle::ridge(Activation::Sign, vec![0.6, 0.8]))).unwrap();
    vec![det, pc, half]
}

fn random_query(rng: &mut ChaCha8Rng, tau: f64) -> StatQuery {
    let a: [f64; 2] = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
    let b: f64 = rng.random_range(-1.0..1.0);
    let c: f64 = rng.random_range(-0.5..0.5);
    StatQuery::new(tau, move |x, y| (a[0] * x[0] + a[1] * x[1] + b * y + c).tanh())
}

#[test]
fn trivial_pconcept_answers() {
    let zero = LabeledDistribution::pconcept(FunctionHandle::zero(3)).unwrap();
    let mut ledger = QueryLedger::new();
    let q = StatQuery::new(0.05, |_, y| y).with_hints(Hints::constant());
    let a = answer_query(&zero, &q, &OracleConfig::honest(), &mut ledger).unwrap();
    assert!(a.value.abs() < 1e-14);

    let d = &fixtures()[1];
    let sq = StatQuery::new(0.05, |_, y| y * y);
    let a = answer_query(d, &sq, &OracleConfig::honest(), &mut ledger).unwrap();
    assert!((a.value - 1.0).abs() < 1e-12);
    assert_eq!(ledger.count(), 2);
}

#[test]
fn clipped_square_and_grid_rounding() {
    let d = LabeledDistribution::deterministic(FunctionHandle::ridge(Activation::Monomial(1), vec![1.0]), 10.0).unwrap();
    let q = StatQuery::new(0.1, |x, y| x[0] * y);
    let mut ledger = QueryLedger::new();
    let honest = answer_query(&d, &q, &OracleConfig::honest(), &mut ledger).unwrap();
    let pdf1 = (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let want = 1.0 - 2.0 * pdf1;
    assert!((honest.value - want).abs() < 1e-10, "{} vs {want}", honest.value);
    let cfg = OracleConfig::honest().with_mode(AdversaryMode::GridRounding);
    let grid = answer_query(&d, &q, &cfg, &mut ledger).unwrap();
    assert!((grid.value - 0.5).abs() < 1e-12);
}

#[test]
fn sample_complexity_arithmetic() {
    let d = LabeledDistribution::pconcept(FunctionHandle::zero(1)).unwrap();
    let mut ledger = QueryLedger::new();
    assert_eq!(implied_sample_complexity(&ledger), 0.0);
    let cfg = OracleConfig::honest();
    answer_query(&d, &StatQuery::new(0.1, |_, y| y), &cfg, &mut ledger).unwrap();
    assert!((implied_sample_complexity(&ledger) - 100.0).abs() < 1e-9);
    answer_query(&d, &StatQuery::new(0.1, |_, y| y), &cfg, &mut ledger).unwrap();
    assert!((implied_sample_complexity(&ledger) - 200.0).abs() < 1e-9);
    let mut mixed = QueryLedger::new();
    answer_query(&d, &StatQuery::new(0.1, |_, y| y), &cfg, &mut mixed).unwrap();
    answer_query(&d, &StatQuery::new(0.01, |_, y| y), &cfg, &mut mixed).unwrap();
    assert!((implied_sample_complexity(&mixed) - 10100.0).abs() < 1e-6);
    assert_eq!(mixed.min_tolerance_used(), 0.01);
}

#[test]
fn nonpositive_tolerance_is_rejected() {
    let d = LabeledDistribution::pconcept(FunctionHandle::zero(1)).unwrap();
    let mut ledger = QueryLedger::new();
    let r = answer_query(&d, &StatQuery::new(0.0, |_, y| y), &OracleConfig::honest(), &mut ledger);
    assert!(matches!(r, Err(Error::Contract(_))));
    assert_eq!(ledger.count(), 0);
}

#[test]
fn coarse_monte_carlo_is_a_resolution_error() {
    let d = &fixtures()[1];
    let oracle = StatOracle::new(d.clone(), OracleConfig::monte_carlo(1000));
    let r = oracle.query(&StatQuery::new(0.01, |_, y| y));
    assert!(matches!(r, Err(Error::Resolution { .. })));
    assert_eq!(oracle.query_count(), 0);
}

#[test]
fn pconcept_range_is_checked() {
    let too_big = FunctionHandle::ridge(Activation::Relu, vec![1.0, 0.0]);
    assert!(matches!(LabeledDistribution::pconcept(too_big), Err(Error::Contract(_))));
}

#[test]
fn soundness_over_random_queries() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (k, d) in fixtures().iter().enumerate() {
        for i in 0..100 {
            let tau = [0.05, 0.02, 0.1][i % 3];
            let q = random_query(&mut rng, tau);
            let mc = d.expectation_mc(&|x, y| q.eval(x, y), &McConfig::new(200_000, 1000 + i as u64));
            for mode in [AdversaryMode::Honest, AdversaryMode::SeededUniform, AdversaryMode::GridRounding] {
                let cfg = OracleConfig::honest().with_mode(mode).with_seed(k as u64);
                let a = evaluate_query(d, &q, &cfg, i as u64).unwrap();
                assert!(a.perturbation.abs() <= tau * (1.0 + 1e-12) / if mode == AdversaryMode::GridRounding { 2.0 } else { 1.0 });
                assert!(
                    (a.value - mc.value).abs() <= tau + 5.0 * mc.std_error + 1e-9,
                    "fixture {k} query {i} {mode:?}: {} vs {}",
                    a.value,
                    mc.value
                );
            }
        }
    }
}

#[test]
fn rewrite_at_zero_is_identity() {
    let q = StatQuery::new(0.1, |x, y| (x[0] - 0.3 * y).sin());
    let r = rewrite_query_for_residual(&q, &FunctionHandle::zero(2), &Activation::Tanh);
    for i in -5..=5 {
        for j in -5..=5 {
            let x = [0.4 * i as f64, 0.1 * j as f64];
            let y = 0.2 * (i + j) as f64;
            assert_eq!(q.eval(&x, y), r.eval(&x, y));
        }
    }
}

#[test]
fn residual_vanishes_at_the_target() {
    let inner = FunctionHandle::ridge(Activation::Relu, vec![0.6, 0.8]);
    let target = FunctionHandle::composed(Activation::Tanh, inner.clone());
    let d = LabeledDistribution::deterministic(target, 1.0).unwrap();
    let oracle = StatOracle::new(d, OracleConfig::honest());
    let res = ResidualAccess::new(&oracle, inner, Activation::Tanh);
    let v = res.query(&StatQuery::new(0.01, |_, y| y / 2.0)).unwrap();
    assert!(v.abs() < 1e-14);
}

#[test]
fn rewritten_queries_match_explicit_residual_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let base = fixtures()[1].clone();
    for i in 0..10 {
        let w = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let f = FunctionHandle::ridge(Activation::Relu, w);
        let q = random_query(&mut rng, 0.05);
        let shift = FunctionHandle::composed(Activation::Tanh, f.clone());
        let explicit = LabeledDistribution::shifted(base.clone(), shift, 1.0).unwrap();
        let direct = explicit.expectation_mc(&|x, y| q.eval(x, y), &McConfig::new(200_000, 77 + i));
        let oracle = StatOracle::new(base.clone(), OracleConfig::honest());
        let via = ResidualAccess::new(&oracle, f, Activation::Tanh).query(&q).unwrap();
        assert!((via - direct.value).abs() <= 4.0 * direct.std_error + 1e-9, "{i}: {via} vs {}", direct.value);
    }
}

#[test]
fn boolean_simulation_examples() {
    let constant = LabeledDistribution::deterministic(FunctionHandle::constant(2, 3.0), 3.0).unwrap();
    let p = simulate_boolean_from_real(&constant).unwrap();
    let mut ledger = QueryLedger::new();
    let b = answer_query(&p, &StatQuery::new(0.01, |_, y| y), &OracleConfig::honest(), &mut ledger).unwrap();
    assert!((b.value - 1.0).abs() < 1e-12);

    for d in fixtures() {
        let c = d.label_bound();
        let p = simulate_boolean_from_real(&d).unwrap();
        let cfg = McConfig::new(400_000, 9);
        let ep = p.expectation_mc(&|_, b| b, &cfg);
        let ed = d.expectation_mc(&|_, y| y, &McConfig::new(400_000, 10));
        let diff = ep.value - ed.value / c;
        let sigma = (ep.std_error.powi(2) + (ed.std_error / c).powi(2)).sqrt();
        assert!(diff.abs() <= 4.0 * sigma + 1e-12, "{diff} vs {sigma}");
    }
}

#[test]
fn boolean_queries_by_two_term_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for d in fixtures() {
        let p = simulate_boolean_from_real(&d).unwrap();
        let oracle = StatOracle::new(d.clone(), OracleConfig::honest());
        let access = BooleanAccess::new(&oracle).unwrap();
        for i in 0..5 {
            let q = random_query(&mut rng, 0.02);
            let via = access.query(&q).unwrap();
            let direct = p.expectation_mc(&|x, y| q.eval(x, y), &McConfig::new(200_000, 300 + i));
            assert!((via - direct.value).abs() <= 4.0 * direct.std_error + 1e-9);
        }
        assert_eq!(oracle.query_count(), 10);
    }
}

#[test]
fn boolean_access_needs_bounded_labels() {
    let d = LabeledDistribution::pconcept(FunctionHandle::zero(2)).unwrap();
    let oracle = StatOracle::new(d, OracleConfig::honest());
    let res = ResidualAccess::new(&oracle, FunctionHandle::zero(2), Activation::Relu);
    assert!(BooleanAccess::new(&res).is_err());
}

#[test]
fn ledger_csv_has_schema() {
    let d = LabeledDistribution::pconcept(FunctionHandle::zero(1)).unwrap();
    let oracle = StatOracle::new(d, OracleConfig::honest().with_mode(AdversaryMode::SeededUniform));
    oracle.query(&StatQuery::new(0.1, |_, y| y)).unwrap();
    let dir = std::env::temp_dir().join(format!("sqboost-ledger-{}", std::process::id()));
    let path = dir.join("ledger.csv");
    oracle.ledger().write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("ordinal,tolerance,adversary_mode,answer,est_stderr\n0,"));
    assert!(text.contains("seeded_uniform"));
    std::fs::remove_dir_all(dir).ok();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ledger_count_and_min_tolerance(taus in prop::collection::vec(0.001f64..1.0, 1..20)) {
        let d = LabeledDistribution::pconcept(FunctionHandle::zero(1)).unwrap();
        let oracle = StatOracle::new(d, OracleConfig::honest());
        for (i, &t) in taus.iter().enumerate() {
            oracle.query(&StatQuery::new(t, |_, y| y).with_hints(Hints::constant())).unwrap();
            prop_assert_eq!(oracle.query_count(), i + 1);
        }
        let ledger = oracle.ledger();
        let want = taus.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(ledger.min_tolerance_used(), want);
        let ords: Vec<u64> = ledger.entries().iter().map(|e| e.ordinal).collect();
        prop_assert_eq!(ords, (0..taus.len() as u64).collect::<Vec<_>>());
    }

    #[test]
    fn clipped_queries_stay_in_range(s in -1e6f64..1e6, x in -10.0f64..10.0, y in -10.0f64..10.0) {
        let q = StatQuery::new(0.1, move |x, y| s * x[0] * y);
        let v = q.eval(&[x], y);
        prop_assert!((-1.0..=1.0).contains(&v));
    }
}
