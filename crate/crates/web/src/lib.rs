//! Browser bindings: Hermite tables, hard-instance norms and boosting traces.

use wasm_bindgen::prelude::*;

use sqboost::fixtures::{boost_fixture, fixture_oracle, run_boost, BaseKind};
use sqboost::funcspace::{mc_gaussian, McConfig};
use sqboost::hard_instance::{default_max_degree, norm_squared_g, HardInstance};
use sqboost::hermite::{hermite_coefficients_by_quadrature, relu_hermite_coefficient};
use sqboost::Activation;

fn js_err(e: sqboost::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn activation(name: &str) -> Result<Activation, JsError> {
    name.parse::<Activation>().map_err(js_err)
}

/// Rows of `[a, closed_form, quadrature]` for the relu coefficients, flattened.
#[wasm_bindgen]
pub fn hermite_table(max_degree: usize) -> Result<Vec<f64>, JsError> {
    if max_degree > 60 {
        return Err(JsError::new("max_degree must be at most 60"));
    }
    let quad = hermite_coefficients_by_quadrature(&Activation::Relu, max_degree, 64.max(max_degree + 1)).map_err(js_err)?;
    Ok((0..=max_degree)
        .flat_map(|a| [a as f64, relu_hermite_coefficient(a), quad.coeffs[a]])
        .collect())
}

/// `[series, mc, mc_stderr]` for the squared norm of the hidden layer.
#[wasm_bindgen]
pub fn hard_instance_norm(phi: &str, m: u32, samples: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    if m == 0 || m > 64 {
        return Err(JsError::new("m must lie in 1..=64"));
    }
    let inst = HardInstance::new(m, activation(phi)?, Activation::Tanh).map_err(js_err)?;
    let series = norm_squared_g(&inst, default_max_degree(m)).map_err(js_err)?;
    let mc = mc_gaussian(&McConfig::new(samples.max(1), seed), 2, |z| inst.g_planar([z[0], z[1]]).powi(2));
    Ok(vec![series.value, mc.value, mc.std_error])
}

/// Rows of `[t, gamma, gap, gap_bound, l2_to_target]` from a boosting run
/// with the grid base learner, flattened.
#[wasm_bindgen]
pub fn boost_trace(fixture: &str, iterations: usize, psi: &str, seed: u64) -> Result<Vec<f64>, JsError> {
    if iterations > 100 {
        return Err(JsError::new("at most 100 iterations"));
    }
    let fx = boost_fixture(fixture, activation(psi)?).map_err(js_err)?;
    let run = run_boost(&fx, iterations, BaseKind::Grid, fixture_oracle(seed)).map_err(js_err)?;
    Ok(run
        .trace
        .records
        .iter()
        .flat_map(|r| {
            let o = r.observation.expect("monitored run");
            [r.t as f64, r.gamma, o.gap, r.gap_bound, o.l2_to_target]
        })
        .collect())
}
