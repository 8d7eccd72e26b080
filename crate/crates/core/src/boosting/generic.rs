use crate::error::{Error, Result};

/// A smooth convex objective on `R^k`.
pub trait Objective {
    fn value(&self, z: &[f64]) -> f64;
    fn gradient(&self, z: &[f64]) -> Vec<f64>;
    /// Curvature constant over the convex hull of `atoms`.
    fn curvature(&self, atoms: &[Vec<f64>]) -> f64;
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// `(z - c)^T G (z - c)` with `G` positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub gram: Vec<Vec<f64>>,
    pub center: Vec<f64>,
}

impl Quadratic {
    /// `scale * ||z - c||^2`.
    pub fn isotropic(center: Vec<f64>, scale: f64) -> Self {
        let k = center.len();
        let gram = (0..k)
            .map(|i| (0..k).map(|j| if i == j { scale } else { 0.0 }).collect())
            .collect();
        Self { gram, center }
    }

    fn form(&self, v: &[f64]) -> f64 {
        self.gram
            .iter()
            .zip(v)
            .map(|(row, vi)| vi * row.iter().zip(v).map(|(g, vj)| g * vj).sum::<f64>())
            .sum()
    }
}

impl Objective for Quadratic {
    fn value(&self, z: &[f64]) -> f64 {
        let d: Vec<f64> = z.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        self.form(&d)
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = z.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        self.gram
            .iter()
            .map(|row| 2.0 * row.iter().zip(&d).map(|(g, v)| g * v).sum::<f64>())
            .collect()
    }

    /// `2 max_{i,j} (a_i - a_j)^T G (a_i - a_j)`.
    fn curvature(&self, atoms: &[Vec<f64>]) -> f64 {
        let mut worst = 0.0f64;
        for a in atoms {
            for b in atoms {
                let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                worst = worst.max(self.form(&d));
            }
        }
        2.0 * worst
    }
}

/// How the linear subproblem spends its allowed slack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlackPolicy {
    Exact,
    /// The worst atom whose score is within the slack of the best.
    Adversarial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenericConfig {
    pub iterations: usize,
    pub delta: f64,
    pub alpha: f64,
    pub policy: SlackPolicy,
}

impl GenericConfig {
    pub fn gamma(&self, t: usize) -> f64 {
        (2.0 / (self.alpha * (t as f64 + 2.0))).min(1.0)
    }

    pub fn gap_bound(&self, curvature: f64, t: usize) -> f64 {
        2.0 * curvature * (1.0 + self.delta) / (self.alpha * self.alpha * (t as f64 + 2.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenericRecord {
    pub t: usize,
    pub gamma: f64,
    pub value: f64,
    pub gap: f64,
    pub gap_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenericTrace {
    pub records: Vec<GenericRecord>,
    pub iterate: Vec<f64>,
    pub curvature: f64,
}

/// Frank-Wolfe over the convex hull of `atoms`, starting at the first atom.
/// The linear subproblem returns `z + alpha (s - z)` where `s` is an atom
/// within `delta gamma_t C_p / 2` of the best.
pub fn run_fw_generic(objective: &dyn Objective, atoms: &[Vec<f64>], optimum: f64, config: &GenericConfig) -> Result<GenericTrace> {
    let first = atoms.first().ok_or_else(|| Error::Contract("no atoms".into()))?;
    if !(config.alpha > 0.0 && config.alpha <= 1.0) {
        return Err(Error::Contract(format!("alpha {} outside (0, 1]", config.alpha)));
    }
    let curvature = objective.curvature(atoms);
    let mut z = first.clone();
    let mut records = Vec::with_capacity(config.iterations);
    for t in 0..config.iterations {
        let gamma = config.gamma(t);
        let g = objective.gradient(&z);
        let scores: Vec<f64> = atoms.iter().map(|a| a.iter().zip(&g).map(|(x, y)| x * y).sum()).collect();
        let best = scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let slack = 0.5 * config.delta * gamma * curvature;
        let pick = match config.policy {
            SlackPolicy::Exact => scores.iter().position(|s| *s == best),
            SlackPolicy::Adversarial => scores
                .iter()
                .enumerate()
                .filter(|(_, s)| **s <= best + slack)
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i),
        }
        .expect("nonempty atoms");
        let s: Vec<f64> = z
            .iter()
            .zip(&atoms[pick])
            .map(|(zi, ai)| zi + config.alpha * (ai - zi))
            .collect();
        z = z.iter().zip(&s).map(|(zi, si)| zi + gamma * (si - zi)).collect();
        let value = objective.value(&z);
        records.push(GenericRecord {
            t: t + 1,
            gamma,
            value,
            gap: value - optimum,
            gap_bound: config.gap_bound(curvature, t + 1),
        });
    }
    Ok(GenericTrace {
        records,
        iterate: z,
        curvature,
    })
}

/// Euclidean diameter of a point set.
pub fn diameter(atoms: &[Vec<f64>]) -> f64 {
    atoms
        .iter()
        .flat_map(|a| atoms.iter().map(move |b| sq_dist(a, b)))
        .fold(0.0, f64::max)
        .sqrt()
}
