use crate::hermite::fill_normalized;

use super::handle::Hints;

pub type MultiIndex = Vec<u32>;

/// All `I in N^n` with `|I| <= d` in graded-lex order: by total degree, then
/// lexicographically with larger leading exponents first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexSet {
    pub dimension: usize,
    pub max_total_degree: u32,
    pub indices: Vec<MultiIndex>,
}

impl MultiIndexSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn enumerate_multi_indices(n: usize, d: u32) -> MultiIndexSet {
    let mut indices = Vec::new();
    let mut current = vec![0u32; n];
    for total in 0..=d {
        compositions(n, total, 0, &mut current, &mut indices);
    }
    MultiIndexSet {
        dimension: n,
        max_total_degree: d,
        indices,
    }
}

fn compositions(n: usize, remaining: u32, pos: usize, current: &mut [u32], out: &mut Vec<MultiIndex>) {
    if pos + 1 == n {
        current[pos] = remaining;
        out.push(current.to_vec());
        return;
    }
    for k in (0..=remaining).rev() {
        current[pos] = k;
        compositions(n, remaining - k, pos + 1, current, out);
    }
    current[pos] = 0;
}

pub fn total_degree(index: &[u32]) -> u32 {
    index.iter().sum()
}

/// A finite expansion `sum_I c_I H_I(x)` in normalized multivariate Hermite
/// polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitePolynomial {
    arity: usize,
    terms: Vec<(MultiIndex, f64)>,
}

impl HermitePolynomial {
    pub fn new(arity: usize, terms: Vec<(MultiIndex, f64)>) -> Self {
        assert!(terms.iter().all(|(i, _)| i.len() == arity), "index length must equal arity");
        Self { arity, terms }
    }

    /// Coefficients laid out along an index set.
    pub fn from_coefficients(set: &MultiIndexSet, coeffs: &[f64]) -> Self {
        assert_eq!(set.len(), coeffs.len());
        Self::new(
            set.dimension,
            set.indices.iter().cloned().zip(coeffs.iter().copied()).collect(),
        )
    }

    /// The single basis element `H_I`.
    pub fn basis(index: MultiIndex) -> Self {
        Self::new(index.len(), vec![(index, 1.0)])
    }

    /// The multilinear monomial `prod_{i in S} x_i`.
    pub fn monomial(arity: usize, support: &[usize]) -> Self {
        let mut index = vec![0; arity];
        for &i in support {
            index[i] = 1;
        }
        Self::basis(index)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[(MultiIndex, f64)] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(i, _)| total_degree(i)).max().unwrap_or(0)
    }

    /// `sqrt(sum c_I^2)` when no index repeats.
    pub fn exact_norm(&self) -> Option<f64> {
        let mut seen: Vec<&MultiIndex> = self.terms.iter().map(|(i, _)| i).collect();
        seen.sort();
        seen.dedup();
        if seen.len() != self.terms.len() {
            return None;
        }
        Some(self.terms.iter().map(|(_, c)| c * c).sum::<f64>().sqrt())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let max_per_coord: Vec<usize> = (0..self.arity)
            .map(|k| self.terms.iter().map(|(i, _)| i[k] as usize).max().unwrap_or(0))
            .collect();
        let tables: Vec<Vec<f64>> = x
            .iter()
            .zip(&max_per_coord)
            .map(|(&xi, &m)| {
                let mut t = vec![0.0; m + 1];
                fill_normalized(xi, &mut t);
                t
            })
            .collect();
        self.terms.iter().fold(0.0, |acc, (index, c)| {
            let prod = index
                .iter()
                .enumerate()
                .fold(1.0, |p, (k, &a)| p * tables[k][a as usize]);
            acc + c * prod
        })
    }

    pub fn hints(&self) -> Hints {
        let directions = (0..self.arity)
            .filter(|&k| self.terms.iter().any(|(i, c)| i[k] > 0 && *c != 0.0))
            .map(|k| {
                let mut e = vec![0.0; self.arity];
                e[k] = 1.0;
                e
            })
            .collect();
        Hints {
            directions: Some(directions),
            kinks: Vec::new(),
            growth: Some(self.degree()),
        }
    }
}
