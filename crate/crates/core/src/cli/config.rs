use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    HermiteTable,
    NormCheck,
    FwConvergence,
    LowdegBench,
    SdaReport,
    BoundTable,
}

pub const PRESETS: [Preset; 6] = [
    Preset::HermiteTable,
    Preset::NormCheck,
    Preset::FwConvergence,
    Preset::LowdegBench,
    Preset::SdaReport,
    Preset::BoundTable,
];

/// Keys every preset accepts.
const COMMON: [(&str, &str); 3] = [("seed", "0"), ("samples", "1000000"), ("out", "out")];

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::HermiteTable => "hermite_table",
            Preset::NormCheck => "norm_check",
            Preset::FwConvergence => "fw_convergence",
            Preset::LowdegBench => "lowdeg_bench",
            Preset::SdaReport => "sda_report",
            Preset::BoundTable => "bound_table",
        }
    }

    /// Preset-specific keys with their defaults.
    pub fn keys(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Preset::HermiteTable => &[("max_degree", "20"), ("nodes", "64")],
            Preset::NormCheck => &[("phi", "relu"), ("m", "2")],
            Preset::FwConvergence => &[("fixture", "realizable"), ("T", "50"), ("psi", "tanh"), ("base", "grid")],
            Preset::LowdegBench => &[("epsilon", "0.1"), ("grid", "256")],
            Preset::SdaReport => &[("class", "monomials:n=4,d=2"), ("gamma", "0.25"), ("mode", "exact")],
            Preset::BoundTable => &[("epsilon", "0.01"), ("tau", "0.0001"), ("beta", "0.5")],
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PRESETS
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown preset '{s}'")))
    }
}

/// A preset with every parameter resolved to a string value.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    params: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn new(preset: Preset) -> Self {
        let params = COMMON
            .iter()
            .chain(preset.keys())
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Self { preset, params }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.params.get_mut(key) {
            Some(slot) => {
                *slot = value.trim().to_string();
                Ok(())
            }
            None => Err(Error::Usage(format!("unknown key '{key}' for preset {}", self.preset))),
        }
    }

    /// Applies `key=value` lines; a `preset` line must agree with ours.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("line {}: expected key=value, got '{line}'", lineno + 1)))?;
            let k = k.trim();
            if k == "preset" {
                let p: Preset = v.trim().parse()?;
                if p != self.preset {
                    return Err(Error::Usage(format!("config is for preset {p}, running {}", self.preset)));
                }
                continue;
            }
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.apply_text(&text)
    }

    pub fn get(&self, key: &str) -> &str {
        self.params.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)
            .parse()
            .map_err(|_| Error::Usage(format!("bad value '{}' for key '{key}'", self.get(key))))
    }

    pub fn output_dir(&self) -> PathBuf {
        PathBuf::from(self.get("out"))
    }

    /// The resolved config as `key=value` lines, preset first.
    pub fn render(&self) -> String {
        let mut s = format!("preset={}\n", self.preset);
        for (k, v) in &self.params {
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    }
}
