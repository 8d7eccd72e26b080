//! Seeded Monte Carlo over fixed chunks.
//!
//! Samples are split into a fixed number of chunks, each drawing from its own
//! ChaCha stream, and chunk summaries are merged in chunk order. The result is
//! therefore identical whether chunks run on one thread or many.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_SEED: u64 = 0x5EED_2024;
const DEFAULT_CHUNKS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub chunks: usize,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            chunks: DEFAULT_CHUNKS,
        }
    }
}

impl Default for McConfig {
    fn default() -> Self {
        Self::new(DEFAULT_SAMPLES, DEFAULT_SEED)
    }
}

/// A point estimate with its standard error (zero for deterministic rules).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
        }
    }

    /// True when `other` lies within `k` combined standard errors, or within
    /// `floor` when both errors vanish.
    pub fn agrees_with(&self, other: f64, k: f64, floor: f64) -> bool {
        (self.value - other).abs() <= k * self.std_error + floor
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }

    fn estimate(&self) -> Estimate {
        let var = if self.count > 1.0 {
            self.m2 / (self.count - 1.0)
        } else {
            0.0
        };
        Estimate {
            value: self.mean,
            std_error: (var / self.count.max(1.0)).sqrt(),
        }
    }
}

fn chunk_sizes(cfg: &McConfig) -> Vec<usize> {
    let chunks = cfg.chunks.max(1).min(cfg.samples.max(1));
    let base = cfg.samples / chunks;
    let extra = cfg.samples % chunks;
    (0..chunks).map(|i| base + usize::from(i < extra)).collect()
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Means and standard errors of `outputs` simultaneous statistics. `draw`
/// receives a chunk-local generator and fills one value per statistic.
pub fn mc_vector<F>(cfg: &McConfig, outputs: usize, draw: F) -> Vec<Estimate>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let sizes = chunk_sizes(cfg);
    let run_chunk = |(i, &size): (usize, &usize)| -> Vec<Moments> {
        let mut rng = chunk_rng(cfg.seed, i);
        let mut acc = vec![Moments::default(); outputs];
        let mut buf = vec![0.0; outputs];
        for _ in 0..size {
            draw(&mut rng, &mut buf);
            for (m, &v) in acc.iter_mut().zip(&buf) {
                m.push(v);
            }
        }
        acc
    };
    #[cfg(feature = "parallel")]
    let per_chunk: Vec<Vec<Moments>> = {
        use rayon::prelude::*;
        sizes.par_iter().enumerate().map(run_chunk).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let per_chunk: Vec<Vec<Moments>> = sizes.iter().enumerate().map(run_chunk).collect();

    let mut total = vec![Moments::default(); outputs];
    for chunk in per_chunk {
        for (t, c) in total.iter_mut().zip(chunk) {
            *t = t.merge(c);
        }
    }
    total.iter().map(Moments::estimate).collect()
}

/// Mean of a scalar statistic drawn by `draw`.
pub fn mc_scalar<F>(cfg: &McConfig, draw: F) -> Estimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    mc_vector(cfg, 1, |rng, out| out[0] = draw(rng))[0]
}

/// `E[f(x)]` for `x ~ N(0, I_n)`.
pub fn mc_gaussian<F>(cfg: &McConfig, n: usize, f: F) -> Estimate
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    mc_scalar(cfg, |rng| {
        let x = standard_normal_vec(rng, n);
        f(&x)
    })
}

pub fn standard_normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}
