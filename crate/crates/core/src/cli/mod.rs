//! Command-line experiment driver.

mod config;
mod run;
mod table;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};

pub use config::{ExperimentConfig, Preset, PRESETS};
pub use run::{run_experiment, Check, Report};
pub use table::{emit_csv, fmt_f64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "sqboost", version, about = "Statistical-query boosting experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Master seed for oracles and Monte Carlo estimates.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo sample budget.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat key=value config file; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Extra key=value overrides.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Relu Hermite coefficients, closed form against quadrature.
    Hermite {
        #[arg(long)]
        max_degree: Option<usize>,
    },
    /// Norm of a hard instance, series against Monte Carlo.
    Norms {
        #[arg(long)]
        phi: Option<String>,
        #[arg(long)]
        m: Option<u32>,
    },
    /// Frank-Wolfe boosting on a named fixture.
    Boost {
        #[arg(long)]
        fixture: Option<String>,
        #[arg(long = "T")]
        t: Option<usize>,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        base: Option<String>,
    },
    /// Low-degree learner against the idealized grid benchmark.
    Lowdeg {
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Statistical dimension of a monomial class.
    Sda {
        #[arg(long)]
        class: Option<String>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        mode: Option<String>,
    },
    /// Lower-bound parameters and regime constraints.
    Bounds {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Every preset with defaults, each in its own subdirectory.
    VerifyAll,
}

fn push<T: ToString>(out: &mut Vec<(String, String)>, key: &str, v: Option<T>) {
    if let Some(v) = v {
        out.push((key.to_string(), v.to_string()));
    }
}

impl Command {
    fn preset_and_overrides(self) -> Option<(Preset, Vec<(String, String)>)> {
        let mut o = Vec::new();
        let preset = match self {
            Command::Hermite { max_degree } => {
                push(&mut o, "max_degree", max_degree);
                Preset::HermiteTable
            }
            Command::Norms { phi, m } => {
                push(&mut o, "phi", phi);
                push(&mut o, "m", m);
                Preset::NormCheck
            }
            Command::Boost { fixture, t, psi, base } => {
                push(&mut o, "fixture", fixture);
                push(&mut o, "T", t);
                push(&mut o, "psi", psi);
                push(&mut o, "base", base);
                Preset::FwConvergence
            }
            Command::Lowdeg { epsilon } => {
                push(&mut o, "epsilon", epsilon);
                Preset::LowdegBench
            }
            Command::Sda { class, gamma, mode } => {
                push(&mut o, "class", class);
                push(&mut o, "gamma", gamma);
                push(&mut o, "mode", mode);
                Preset::SdaReport
            }
            Command::Bounds { epsilon, tau, beta } => {
                push(&mut o, "epsilon", epsilon);
                push(&mut o, "tau", tau);
                push(&mut o, "beta", beta);
                Preset::BoundTable
            }
            Command::VerifyAll => return None,
        };
        Some((preset, o))
    }
}

impl Global {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut o = Vec::new();
        push(&mut o, "seed", self.seed);
        push(&mut o, "samples", self.samples);
        push(&mut o, "out", self.out.as_ref().map(|p| p.display()));
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("--set expects key=value, got '{kv}'")))?;
            o.push((k.trim().to_string(), v.to_string()));
        }
        Ok(o)
    }
}

/// Resolves defaults, then the config file, then command-line overrides.
pub fn resolve(preset: Preset, file: Option<&std::path::Path>, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(preset);
    if let Some(path) = file {
        cfg.apply_file(path)?;
    }
    for (k, v) in overrides {
        cfg.set(k, v)?;
    }
    Ok(cfg)
}

fn print_report(cfg: &ExperimentConfig, report: &Report) {
    println!("[{}]", cfg.preset);
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for n in &report.notes {
        println!("note: {n}");
    }
}

fn execute(cli: Cli) -> Result<bool> {
    let global = cli.global.overrides()?;
    match cli.command.preset_and_overrides() {
        Some((preset, mut o)) => {
            o.extend(global);
            let cfg = resolve(preset, cli.global.config.as_deref(), &o)?;
            let report = run_experiment(&cfg)?;
            print_report(&cfg, &report);
            Ok(report.passed())
        }
        None => {
            if cli.global.config.is_some() || !cli.global.set.is_empty() {
                return Err(Error::Usage("verify-all takes only --seed, --samples and --out".into()));
            }
            let root = cli.global.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let mut all = true;
            for preset in PRESETS {
                let mut o: Vec<(String, String)> = global.iter().filter(|(k, _)| k != "out").cloned().collect();
                o.push(("out".into(), root.join(preset.name()).display().to_string()));
                let cfg = resolve(preset, None, &o)?;
                let report = run_experiment(&cfg)?;
                print_report(&cfg, &report);
                all &= report.passed();
            }
            Ok(all)
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_ASSERTION,
        Err(e @ Error::Usage(_)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
