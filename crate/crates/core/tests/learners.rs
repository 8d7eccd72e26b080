use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sqboost::funcspace::{enumerate_multi_indices, inner_product, norm, FunctionHandle, HermitePolynomial, Method};
use sqboost::learners::*;
use sqboost::sq_oracle::{simulate_boolean_from_real, LabeledDistribution, OracleConfig, SqAccess, StatOracle};
use sqboost::Activation;

fn plane() -> [Vec<f64>; 2] {
    [vec![1.0, 0.0], vec![0.0, 1.0]]
}

fn unit(t: f64) -> Vec<f64> {
    vec![t.cos(), t.sin()]
}

const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `min(1, relu(<w, x>))` with `||w|| = 1/4`: a relu unit, clipped where
/// its argument passes four standard deviations.
fn realizable(angle: f64) -> LabeledDistribution {
    let w: Vec<f64> = unit(angle).iter().map(|v| 0.25 * v).collect();
    LabeledDistribution::deterministic(FunctionHandle::ridge(Activation::TruncatedRelu(1.0), w), 1.0).unwrap()
}

fn truth(h: &FunctionHandle, d: &LabeledDistribution) -> f64 {
    inner_product(h, d.conditional_mean(), &Method::Quadrature).unwrap().value
}

#[test]
fn low_degree_on_zero_mean_returns_zero() {
    let d = LabeledDistribution::pconcept(FunctionHandle::zero(2)).unwrap();
    let oracle = StatOracle::new(d, OracleConfig::honest());
    let out = LowDegreeLearner::new(HypothesisClass::ReluUnits, R).learn(&oracle, 0.1).unwrap();
    assert_eq!(out.achieved_correlation, 0.0);
    assert!(out.low_degree.unwrap().gated);
    assert_eq!(out.hypothesis.eval(&[0.3, -1.0]), 0.0);
}

#[test]
fn low_degree_is_blind_to_higher_hermite_terms() {
    let h3 = FunctionHandle::polynomial(HermitePolynomial::basis(vec![3, 0]));
    let d = LabeledDistribution::deterministic(h3, 100.0).unwrap();
    let oracle = StatOracle::new(d.clone(), OracleConfig::honest());
    let out = LowDegreeLearner::new(HypothesisClass::Monomials(1), R).learn(&oracle, 0.1).unwrap();
    assert_eq!(out.queries_used, 3);
    assert!(truth(&out.hypothesis, &d).abs() < 1e-9);
}

#[test]
fn low_degree_matches_idealized_grid() {
    let candidates = ridge_grid(&Activation::Relu, 256, &plane(), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let d = realizable(rng.random_range(0.0..std::f64::consts::TAU));
        let bench = idealized_grid_learn(&d, &candidates, 0.1).unwrap();
        let oracle = StatOracle::new(d.clone(), OracleConfig::honest());
        let out = LowDegreeLearner::new(HypothesisClass::ReluUnits, R).learn(&oracle, 0.1).unwrap();
        let nrm = norm(&out.hypothesis, &Method::Auto).unwrap().value;
        assert!(nrm <= R + 1e-9);
        let got = truth(&out.hypothesis, &d);
        assert!(got >= bench.achieved_correlation - 0.1, "{got} vs {}", bench.achieved_correlation);

        let rep = out.low_degree.unwrap();
        assert!(!rep.gated);
        let alpha: Vec<f64> = rep
            .indices
            .indices
            .iter()
            .map(|i| truth(&FunctionHandle::polynomial(HermitePolynomial::basis(i.clone())), &d))
            .collect();
        let an = alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
        let dist = alpha
            .iter()
            .zip(&rep.coefficients)
            .map(|(a, b)| (R * a / an - R * b / rep.estimate_norm).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(dist <= rescaling_bound(R, 2, rep.degree, out.tau_used, 0.1));
    }
}

#[test]
fn infeasible_tolerance_is_reported() {
    let d = realizable(0.0);
    let oracle = StatOracle::new(d, OracleConfig::honest());
    let mut l = LowDegreeLearner::new(HypothesisClass::ReluUnits, R);
    l.tau_floor = 1e-3;
    let r = l.learn(&oracle, 0.1);
    assert!(matches!(r, Err(sqboost::Error::Infeasible { .. })));
}

#[test]
fn idealized_grid_examples() {
    let h = FunctionHandle::ridge(Activation::Relu, unit(0.4));
    let d = LabeledDistribution::deterministic(FunctionHandle::ridge(Activation::Tanh, unit(0.4)), 1.0).unwrap();
    let out = idealized_grid_learn(&d, &[FunctionHandle::scaled(-1.0, h.clone()), h], 0.1).unwrap();
    assert_eq!(out.atom, Some(1));

    let grid = ridge_grid(&Activation::Relu, 32, &plane(), 1.0);
    let target = FunctionHandle::scaled(0.5, FunctionHandle::ridge(Activation::TruncatedRelu(2.0), unit(0.3)));
    let d = LabeledDistribution::deterministic(target, 1.0).unwrap();
    let out = idealized_grid_learn(&d, &grid, 0.1).unwrap();
    assert_eq!(out.atom, Some(2));
    assert!(idealized_grid_learn(&d, &[], 0.1).is_err());
}

#[test]
fn grid_learner_uses_one_query_per_candidate() {
    let grid = signed_ridge_grid(&Activation::Relu, 64, &plane(), 1.0);
    let learner = GridLearner::new(grid.clone(), R).unwrap();
    let d = realizable(1.0);
    let oracle = StatOracle::new(d.clone(), OracleConfig::honest());
    let out = learner.learn(&oracle, 0.05).unwrap();
    assert_eq!(oracle.query_count(), 64);
    let bench = idealized_grid_learn(&d, &grid, 0.05).unwrap();
    assert!(truth(&out.hypothesis, &d) >= bench.achieved_correlation - 0.05);
    assert!(GridLearner::new(vec![FunctionHandle::ridge(Activation::Relu, vec![3.0, 0.0])], R).is_err());
}

#[test]
fn square_loss_conversion() {
    let zero = FunctionHandle::zero(2);
    let out = correlation_from_square_loss(&zero, 0.1).unwrap();
    assert_eq!(norm(&out, &Method::Auto).unwrap().value, 0.0);

    let w: Vec<f64> = unit(0.7).iter().map(|v| v * 0.5 * 2f64.sqrt()).collect();
    let target = FunctionHandle::ridge(Activation::Relu, w);
    assert!((norm(&target, &Method::Quadrature).unwrap().value - 0.5).abs() < 1e-12);
    let proj = square_loss_grid(&target, 256, &plane()).unwrap();
    let h = correlation_from_square_loss(&proj.h_sq, 0.1).unwrap();
    let corr = inner_product(&h, &target, &Method::Quadrature).unwrap().value;
    assert!((corr - proj.norm).abs() < 1e-9);
    assert!((proj.norm - 0.5).abs() < 1e-3);
}

#[test]
fn projection_identity_on_two_ridge_targets() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let a: f64 = rng.random_range(-1.0..1.0);
        let b: f64 = rng.random_range(-1.0..1.0);
        let f = FunctionHandle::sum(vec![
            FunctionHandle::scaled(a, FunctionHandle::ridge(Activation::Relu, unit(rng.random_range(0.0..6.28)))),
            FunctionHandle::scaled(b, FunctionHandle::ridge(Activation::Relu, unit(rng.random_range(0.0..6.28)))),
        ])
        .unwrap();
        let coarse = square_loss_grid(&f, 128, &plane()).unwrap();
        let unit_h = FunctionHandle::scaled(1.0 / coarse.norm, coarse.h_sq.clone());
        let c = inner_product(&unit_h, &f, &Method::Quadrature).unwrap().value;
        assert!((coarse.norm - c.min(1.0)).abs() < 1e-9);
        let fine = square_loss_grid(&f, 1024, &plane()).unwrap();
        let gap = (fine.norm - coarse.norm).abs();
        let resolution = 1.0 - (std::f64::consts::PI / 128.0).cos();
        assert!(gap <= 2.0 * resolution * (1.0 + a.abs() + b.abs()), "{gap}");
    }
}

#[test]
fn boolean_adapter_examples() {
    let pm = FunctionHandle::scaled(0.7, FunctionHandle::ridge(Activation::Tanh, vec![1.0, 1.0]));
    let d = LabeledDistribution::pconcept(pm.clone()).unwrap();
    let p = simulate_boolean_from_real(&d).unwrap();
    for x in [[0.1, 0.2], [-2.0, 1.0], [3.0, 3.0]] {
        assert_eq!(p.conditional_mean().eval(&x), pm.eval(&x));
    }

    let constant = LabeledDistribution::deterministic(FunctionHandle::constant(2, 2.0), 2.0).unwrap();
    let oracle = StatOracle::new(constant, OracleConfig::honest());
    let learner = GridLearner::new(vec![FunctionHandle::constant(2, 0.5), FunctionHandle::constant(2, -0.5)], R).unwrap();
    let out = boolean_zero_one_adapter(&learner, &oracle, 0.1).unwrap();
    assert_eq!(out.atom, Some(0));
    assert!((out.achieved_correlation - 1.0).abs() < 1e-12);

    let sign = FunctionHandle::scaled(1.6, FunctionHandle::ridge(Activation::Sign, unit(2.0)));
    let d = LabeledDistribution::deterministic(sign, 2.0).unwrap();
    let grid = signed_ridge_grid(&Activation::Sign, 64, &plane(), R);
    let bench = idealized_grid_learn(&d, &grid, 0.1).unwrap();
    let oracle = StatOracle::new(d.clone(), OracleConfig::honest());
    let out = boolean_zero_one_adapter(&GridLearner::new(grid, R).unwrap(), &oracle, 0.1).unwrap();
    assert!(truth(&out.hypothesis, &d) >= bench.achieved_correlation - 0.1);
    assert!((out.achieved_correlation - truth(&out.hypothesis, &d)).abs() < 0.1);

    let unbounded = StatOracle::new(LabeledDistribution::pconcept(FunctionHandle::zero(2)).unwrap(), OracleConfig::honest());
    let res = sqboost::sq_oracle::ResidualAccess::new(&unbounded, FunctionHandle::zero(2), Activation::Relu);
    assert!(res.label_bound().is_infinite());
    assert!(boolean_zero_one_adapter(&learner, &res, 0.1).is_err());
}

#[test]
fn multi_index_count_for_coefficient_queries() {
    assert_eq!(enumerate_multi_indices(2, 8).len(), 45);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn square_loss_chain(eps in 1e-3f64..1.0, c in 0.5f64..8.0) {
        let k = SquareLossConstants::new(eps);
        prop_assert!(k.chain_holds(c));
        prop_assert!((k.eps_prime - eps.powi(3) / 8.0).abs() < 1e-15);
    }

    #[test]
    fn grid_outputs_stay_in_the_ball(angle in 0.0f64..6.28, seed in 0u64..1000) {
        let grid = signed_ridge_grid(&Activation::Relu, 16, &plane(), 1.0);
        let learner = GridLearner::new(grid, R).unwrap();
        let d = realizable(angle);
        let cfg = OracleConfig::honest().with_mode(sqboost::sq_oracle::AdversaryMode::SeededUniform).with_seed(seed);
        let oracle = StatOracle::new(d, cfg);
        let out = learner.learn(&oracle, 0.1).unwrap();
        prop_assert!(norm(&out.hypothesis, &Method::Auto).unwrap().value <= R + 1e-9);
    }
}
