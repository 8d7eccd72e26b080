use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::fixtures::{boost_fixture, fixture_oracle, lowdeg_fixture, run_boost, BaseKind, LOWDEG_ANGLES};
use crate::funcspace::{inner_product, mc_gaussian, McConfig, Method};
use crate::hard_instance::{default_max_degree, norm_squared_g, HardInstance};
use crate::hermite::{hermite_coefficients_by_quadrature, relu_hermite_coefficient};
use crate::learners::{degree_scaling, idealized_grid_learn, ridge_grid, BaseLearner, HypothesisClass, LowDegreeLearner};
use crate::sda_bounds::{
    lower_bound_calculator, monomial_class, regime_check, sda_exact, sda_greedy_lower, Family, GramMethod, RegimeParams,
    EXACT_LIMIT,
};
use crate::sq_oracle::{OracleConfig, StatOracle};

use super::config::{ExperimentConfig, Preset};
use super::table::{emit_csv, fmt_f64};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Report {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn csv(&mut self, dir: &Path, file: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let path = dir.join(file);
        emit_csv(&path, header, rows)?;
        self.files.push(path);
        Ok(())
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs one preset, writing its CSV files and `summary.txt` under the
/// configured output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let dir = cfg.output_dir();
    let mut report = Report::default();
    match cfg.preset {
        Preset::HermiteTable => hermite_table(cfg, &dir, &mut report)?,
        Preset::NormCheck => norm_check(cfg, &dir, &mut report)?,
        Preset::FwConvergence => fw_convergence(cfg, &dir, &mut report)?,
        Preset::LowdegBench => lowdeg_bench(cfg, &dir, &mut report)?,
        Preset::SdaReport => sda_report(cfg, &dir, &mut report)?,
        Preset::BoundTable => bound_table(cfg, &dir, &mut report)?,
    }
    write_summary(cfg, &dir, &report)?;
    Ok(report)
}

fn write_summary(cfg: &ExperimentConfig, dir: &Path, report: &Report) -> Result<()> {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut s = String::new();
    let _ = writeln!(s, "# sqboost {} {}", cfg.preset, env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# timestamp={stamp}");
    s.push_str(&cfg.render());
    s.push('\n');
    for c in &report.checks {
        let _ = writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for n in &report.notes {
        let _ = writeln!(s, "note: {n}");
    }
    for f in &report.files {
        let _ = writeln!(s, "wrote {}", f.display());
    }
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let path = dir.join("summary.txt");
    std::fs::write(&path, s).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn hermite_table(cfg: &ExperimentConfig, dir: &Path, report: &mut Report) -> Result<()> {
    let max_degree: usize = cfg.parse("max_degree")?;
    let nodes: usize = cfg.parse("nodes")?;
    let quad = hermite_coefficients_by_quadrature(&Activation::Relu, max_degree, nodes.max(max_degree + 1))?;
    let mut worst: f64 = 0.0;
    let rows: Vec<Vec<String>> = (0..=max_degree)
        .map(|a| {
            let closed = relu_hermite_coefficient(a);
            let diff = (closed - quad.coeffs[a]).abs();
            worst = worst.max(diff);
            vec![a.to_string(), fmt_f64(closed), fmt_f64(quad.coeffs[a]), fmt_f64(diff)]
        })
        .collect();
    report.csv(dir, "hermite.csv", &["a", "closed_form", "quadrature", "abs_diff"], &rows)?;
    report.check("closed form vs quadrature", worst < 1e-8, format!("max abs diff {worst:.3e} (< 1e-8)"));
    let odd_zero = (3..=max_degree).step_by(2).all(|a| relu_hermite_coefficient(a) == 0.0);
    report.check("odd coefficients above one vanish", odd_zero, "exact zeros");
    Ok(())
}

fn norm_check(cfg: &ExperimentConfig, dir: &Path, report: &mut Report) -> Result<()> {
    let phi: Activation = cfg.parse("phi")?;
    let m: u32 = cfg.parse("m")?;
    let samples: usize = cfg.parse("samples")?;
    let seed: u64 = cfg.parse("seed")?;
    let inst = HardInstance::new(m, phi.clone(), Activation::Tanh)?;
    let series = norm_squared_g(&inst, default_max_degree(m))?;
    let mc = mc_gaussian(&McConfig::new(samples, seed), 2, |z| inst.g_planar([z[0], z[1]]).powi(2));
    let rows = vec![vec![
        m.to_string(),
        phi.to_string(),
        fmt_f64(series.value),
        fmt_f64(mc.value),
        fmt_f64(mc.std_error),
    ]];
    report.csv(dir, "norms.csv", &["m", "phi", "series_value", "mc_value", "mc_stderr"], &rows)?;
    let diff = (series.value - mc.value).abs();
    let allowed = 4.0 * mc.std_error + series.tail_error;
    report.check(
        "series vs monte carlo",
        diff <= allowed,
        format!("|{:.6} - {:.6}| = {diff:.3e} (allowed {allowed:.3e})", series.value, mc.value),
    );
    if !series.tail_certified {
        report.notes.push(format!("tail estimate not certified at degree {}", series.max_degree));
    }
    Ok(())
}

fn fw_convergence(cfg: &ExperimentConfig, dir: &Path, report: &mut Report) -> Result<()> {
    let fixture = boost_fixture(cfg.get("fixture"), cfg.parse("psi")?)?;
    let iterations: usize = cfg.parse("T")?;
    let base: BaseKind = cfg.parse("base")?;
    let samples: usize = cfg.parse("samples")?;
    let oracle = fixture_oracle(cfg.parse("seed")?).with_samples(samples);
    let run = run_boost(&fixture, iterations, base, oracle)?;
    let mut violations = Vec::new();
    let rows: Vec<Vec<String>> = run
        .trace
        .records
        .iter()
        .map(|r| {
            let o = r.observation.expect("monitored run");
            if o.gap > r.gap_bound + 5.0 * o.gap_std_error {
                violations.push(r.t);
            }
            vec![
                r.t.to_string(),
                fmt_f64(r.gamma),
                fmt_f64(o.gap),
                fmt_f64(r.gap_bound),
                fmt_f64(r.subproblem_correlation),
                fmt_f64(o.l2_to_target),
            ]
        })
        .collect();
    report.csv(
        dir,
        "trace.csv",
        &["t", "gamma", "gap_estimate", "gap_bound", "subproblem_correlation", "l2_to_target"],
        &rows,
    )?;
    let path = dir.join("ledger.csv");
    run.ledger.write_csv(&path)?;
    report.files.push(path);
    report.check(
        "gap within bound at every t",
        violations.is_empty(),
        if violations.is_empty() {
            format!("{} iterates", rows.len())
        } else {
            format!("violated at t = {violations:?}")
        },
    );
    let last = run.trace.final_observation().expect("monitored run");
    report.check(
        "final distance within gap bound",
        last.l2_to_target <= last.l2_bound + 5.0 * last.l2_std_error,
        format!("{:.4e} <= {:.4e}", last.l2_to_target, last.l2_bound),
    );
    if let Some(p) = run.predicted_queries {
        report.check(
            "query count matches prediction",
            run.ledger.count() == p,
            format!("{} issued, {p} predicted", run.ledger.count()),
        );
    }
    Ok(())
}

fn lowdeg_bench(cfg: &ExperimentConfig, dir: &Path, report: &mut Report) -> Result<()> {
    let epsilon: f64 = cfg.parse("epsilon")?;
    let grid: usize = cfg.parse("grid")?;
    let seed: u64 = cfg.parse("seed")?;
    let plane = [vec![1.0, 0.0], vec![0.0, 1.0]];
    let candidates = ridge_grid(&Activation::Relu, grid, &plane, 1.0);
    let learner = LowDegreeLearner::new(HypothesisClass::ReluUnits, std::f64::consts::FRAC_1_SQRT_2);
    let mut rows = Vec::new();
    let mut worst = f64::INFINITY;
    for (i, &angle) in LOWDEG_ANGLES.iter().enumerate() {
        let dist = lowdeg_fixture(angle)?;
        let bench = idealized_grid_learn(&dist, &candidates, epsilon)?;
        let oracle = StatOracle::new(dist.clone(), OracleConfig::default().with_seed(seed));
        let out = learner.learn(&oracle, epsilon)?;
        let achieved = inner_product(&out.hypothesis, dist.conditional_mean(), &Method::Quadrature)?;
        worst = worst.min(achieved.value - bench.achieved_correlation + epsilon + 5.0 * achieved.std_error);
        let id = format!("ridge{i}");
        rows.push(vec![
            id.clone(),
            "lowdeg".to_string(),
            fmt_f64(epsilon),
            fmt_f64(out.tau_used),
            out.queries_used.to_string(),
            fmt_f64(achieved.value),
            fmt_f64(bench.achieved_correlation),
        ]);
        rows.push(vec![
            id.clone(),
            "idealized".to_string(),
            fmt_f64(epsilon),
            fmt_f64(0.0),
            bench.queries_used.to_string(),
            fmt_f64(bench.achieved_correlation),
            fmt_f64(bench.achieved_correlation),
        ]);
        let path = dir.join(format!("ledger_{id}.csv"));
        oracle.ledger().write_csv(&path)?;
        report.files.push(path);
    }
    report.csv(
        dir,
        "learners.csv",
        &[
            "fixture_id",
            "mode",
            "epsilon",
            "tau_used",
            "queries",
            "achieved_correlation",
            "benchmark_correlation",
        ],
        &rows,
    )?;
    report.check(
        "low-degree within epsilon of benchmark",
        worst >= 0.0,
        format!("smallest margin {worst:.4e}"),
    );
    let deltas = [0.2, 0.1, 0.05, 0.025];
    let (degrees, slope) = degree_scaling(&HypothesisClass::ReluUnits, &deltas)?;
    report
        .notes
        .push(format!("relu approximate degrees {degrees:?} at delta {deltas:?}, log-log slope {slope:.3}"));
    Ok(())
}

/// Parses `monomials:n=4,d=2` or `tanh-monomials:n=4,d=2`.
fn parse_class(spec: &str) -> Result<(usize, usize, bool)> {
    let bad = || Error::Usage(format!("bad class '{spec}', expected monomials:n=<int>,d=<int>"));
    let (head, rest) = spec.split_once(':').ok_or_else(bad)?;
    let tanh = match head {
        "monomials" => false,
        "tanh-monomials" => true,
        _ => return Err(bad()),
    };
    let (mut n, mut d) = (None, None);
    for part in rest.split(',') {
        match part.split_once('=') {
            Some(("n", v)) => n = v.parse().ok(),
            Some(("d", v)) => d = v.parse().ok(),
            _ => return Err(bad()),
        }
    }
    Ok((n.ok_or_else(bad)?, d.ok_or_else(bad)?, tanh))
}

fn sda_report(cfg: &ExperimentConfig, dir: &Path, report: &mut Report) -> Result<()> {
    let (n, d, tanh) = parse_class(cfg.get("class"))?;
    let gamma: f64 = cfg.parse("gamma")?;
    let mode = cfg.get("mode");
    if mode != "exact" && mode != "greedy" {
        return Err(Error::Usage(format!("unknown sda mode '{mode}', expected exact or greedy")));
    }
    let method = if tanh {
        GramMethod::MonteCarlo(McConfig::new(cfg.parse("samples")?, cfg.parse("seed")?))
    } else {
        GramMethod::Exact
    };
    let cls = monomial_class(n, d, tanh, Some(method))?;
    let path = dir.join("gram.csv");
    cls.write_gram_csv(&path)?;
    report.files.push(path);

    let result = if mode == "exact" { sda_exact(&cls, gamma)? } else { sda_greedy_lower(&cls, gamma)? };
    let rows: Vec<Vec<String>> = result
        .worst_by_size
        .iter()
        .enumerate()
        .map(|(i, v)| vec![(i + 1).to_string(), fmt_f64(*v)])
        .collect();
    let column = if mode == "exact" { "max_average_correlation" } else { "certified_upper_bound" };
    report.csv(dir, "sda.csv", &["size", column], &rows)?;
    report.notes.push(format!(
        "class of {} members, gamma {gamma}: sda ({mode}) = {}",
        cls.len(),
        result.sda
    ));

    let mut worst_z: f64 = 0.0;
    for i in 0..cls.len() {
        for j in 0..cls.len() {
            if i != j {
                let v = cls.gram()[i][j].abs();
                let se = cls.gram_std_error()[i][j];
                worst_z = worst_z.max(if se > 0.0 { v / se } else if v < 1e-12 { 0.0 } else { f64::INFINITY });
            }
        }
    }
    report.check("off-diagonal gram entries vanish", worst_z <= 5.0, format!("largest |G_ij|/se {worst_z:.3}"));
    if cls.len() <= EXACT_LIMIT {
        let exact = sda_exact(&cls, gamma)?.sda;
        let lower = sda_greedy_lower(&cls, gamma)?.sda;
        report.check("certified bound below exhaustive", lower <= exact, format!("{lower} <= {exact}"));
    }
    Ok(())
}

fn bound_table(cfg: &ExperimentConfig, dir: &Path, report: &mut Report) -> Result<()> {
    let epsilon: f64 = cfg.parse("epsilon")?;
    let params = RegimeParams {
        tau: cfg.parse("tau")?,
        epsilon,
        beta: cfg.parse("beta")?,
    };
    let families = [Family::Relu, Family::Sigmoid, Family::Halfspace, Family::Monomial(2), Family::Monomial(3)];
    let mut rows = Vec::new();
    for fam in &families {
        let lb = lower_bound_calculator(fam, epsilon)?;
        rows.push(vec![
            format!("{fam:?}").to_lowercase(),
            fmt_f64(epsilon),
            fmt_f64(lb.k),
            fmt_f64(lb.tau_exponent),
            lb.description,
        ]);
    }
    report.csv(dir, "bounds.csv", &["family", "epsilon", "k", "tau_exponent", "description"], &rows)?;
    let regime = regime_check(&params);
    let rows: Vec<Vec<String>> = regime
        .constraints
        .iter()
        .map(|c| vec![c.name.to_string(), c.holds.to_string(), c.reason.to_string()])
        .collect();
    report.csv(dir, "regime.csv", &["constraint", "holds", "reason"], &rows)?;
    for c in &regime.constraints {
        report.check(format!("regime {}", c.name), c.holds, c.reason);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_specs() {
        assert_eq!(parse_class("monomials:n=4,d=2").unwrap(), (4, 2, false));
        assert_eq!(parse_class("tanh-monomials:d=1,n=3").unwrap(), (3, 1, true));
        assert!(parse_class("monomials:n=4").is_err());
        assert!(parse_class("halfspaces:n=4,d=2").is_err());
    }
}
