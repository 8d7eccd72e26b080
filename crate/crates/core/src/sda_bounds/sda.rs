use crate::error::{Error, Result};

use super::class::FiniteClass;

pub const EXACT_LIMIT: usize = 20;

/// Outcome of a statistical-dimension computation.
#[derive(Debug, Clone, PartialEq)]
pub struct SdaResult {
    pub sda: usize,
    /// Smallest size from which every subset passes, if any.
    pub threshold_size: Option<usize>,
    /// Entry `s - 1` bounds the average correlation of subsets of size `s`
    /// (exact maximum, or an upper bound for the certified method).
    pub worst_by_size: Vec<f64>,
}

/// Largest `d` with every subset of size at least `N / d` passing, given
/// the worst average correlation per size.
pub fn sda_from_profile(worst_by_size: &[f64], gamma: f64) -> SdaResult {
    let n = worst_by_size.len();
    let mut threshold = None;
    for s in (1..=n).rev() {
        if worst_by_size[s - 1] <= gamma {
            threshold = Some(s);
        } else {
            break;
        }
    }
    let sda = match threshold {
        None => 0,
        Some(1) => n,
        Some(s) => n.div_ceil(s - 1) - 1,
    };
    SdaResult {
        sda,
        threshold_size: threshold,
        worst_by_size: worst_by_size.to_vec(),
    }
}

/// Exact statistical dimension by scanning all subsets.
pub fn sda_exact(cls: &FiniteClass, gamma: f64) -> Result<SdaResult> {
    let n = cls.len();
    if n > EXACT_LIMIT {
        return Err(Error::ClassTooLarge {
            size: n,
            limit: EXACT_LIMIT,
        });
    }
    if n == 0 {
        return Err(Error::Contract("empty class".into()));
    }
    let g: Vec<Vec<f64>> = cls.gram().iter().map(|r| r.iter().map(|v| v.abs()).collect()).collect();
    let full = 1usize << n;
    let mut sums = vec![0.0f64; full];
    let mut worst = vec![0.0f64; n];
    for mask in 1..full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let mut cross = 0.0;
        let mut r = rest;
        while r != 0 {
            let j = r.trailing_zeros() as usize;
            cross += g[low][j];
            r &= r - 1;
        }
        sums[mask] = sums[rest] + g[low][low] + 2.0 * cross;
        let s = mask.count_ones() as usize;
        let rho = sums[mask] / (s * s) as f64;
        if rho > worst[s - 1] {
            worst[s - 1] = rho;
        }
    }
    Ok(sda_from_profile(&worst, gamma))
}

/// A certified lower bound on the statistical dimension for classes too
/// large to scan. For each size `s` the average correlation of any subset
/// is bounded by the `s` largest row scores `|G_ii| + (top s-1 of |G_ij|)`.
pub fn sda_greedy_lower(cls: &FiniteClass, gamma: f64) -> Result<SdaResult> {
    let n = cls.len();
    if n == 0 {
        return Err(Error::Contract("empty class".into()));
    }
    let rows: Vec<(f64, Vec<f64>)> = cls
        .gram()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut off: Vec<f64> = r
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| v.abs())
                .collect();
            off.sort_by(|a, b| b.total_cmp(a));
            (r[i].abs(), off)
        })
        .collect();
    let prefix: Vec<Vec<f64>> = rows
        .iter()
        .map(|(_, off)| {
            let mut acc = 0.0;
            std::iter::once(0.0)
                .chain(off.iter().map(|v| {
                    acc += v;
                    acc
                }))
                .collect()
        })
        .collect();
    let mut bound = Vec::with_capacity(n);
    let mut scores = vec![0.0; n];
    for s in 1..=n {
        for (i, (diag, _)) in rows.iter().enumerate() {
            scores[i] = diag + prefix[i][s - 1];
        }
        let mut sorted = scores.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = sorted[..s].iter().sum();
        bound.push(total / (s * s) as f64);
    }
    Ok(sda_from_profile(&bound, gamma))
}
