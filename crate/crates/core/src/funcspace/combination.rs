use crate::error::{Error, Result};

use super::handle::FunctionHandle;

/// A convex combination of atoms, the iterate of Frank-Wolfe.
#[derive(Debug, Clone)]
pub struct ConvexCombination {
    atoms: Vec<(f64, FunctionHandle)>,
}

impl ConvexCombination {
    pub fn single(atom: FunctionHandle) -> Self {
        Self {
            atoms: vec![(1.0, atom)],
        }
    }

    pub fn new(atoms: Vec<(f64, FunctionHandle)>) -> Result<Self> {
        let first = atoms
            .first()
            .ok_or_else(|| Error::Contract("empty convex combination".into()))?;
        let arity = first.1.arity();
        let mut total = 0.0;
        for (w, h) in &atoms {
            if !(0.0..=1.0).contains(w) {
                return Err(Error::Contract(format!("weight {w} outside [0, 1]")));
            }
            if h.arity() != arity {
                return Err(Error::Arity {
                    expected: arity,
                    got: h.arity(),
                });
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Contract(format!("weights sum to {total}")));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, FunctionHandle)] {
        &self.atoms
    }

    pub fn arity(&self) -> usize {
        self.atoms[0].1.arity()
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    pub fn weight_sum(&self) -> f64 {
        self.atoms.iter().map(|(w, _)| w).sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.atoms.iter().fold(0.0, |acc, (w, h)| acc + w * h.eval(x))
    }

    /// The combination as a handle; evaluation order matches [`Self::eval`].
    pub fn to_handle(&self) -> FunctionHandle {
        let terms = self
            .atoms
            .iter()
            .map(|(w, h)| FunctionHandle::scaled(*w, h.clone()))
            .collect();
        FunctionHandle::sum(terms).expect("combination is non-empty with one arity")
    }

    /// Merges atoms that are the same shared handle.
    pub fn compact(&self) -> Self {
        let mut out: Vec<(f64, FunctionHandle)> = Vec::with_capacity(self.atoms.len());
        for (w, h) in &self.atoms {
            match out.iter_mut().find(|(_, g)| g.ptr_eq(h)) {
                Some(slot) => slot.0 += w,
                None => out.push((*w, h.clone())),
            }
        }
        Self { atoms: out }
    }
}

/// `(1 - gamma) * current + gamma * atom`.
pub fn fw_step(current: &ConvexCombination, atom: FunctionHandle, gamma: f64) -> Result<ConvexCombination> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Contract(format!("step size {gamma} outside [0, 1]")));
    }
    if atom.arity() != current.arity() {
        return Err(Error::Arity {
            expected: current.arity(),
            got: atom.arity(),
        });
    }
    if gamma == 0.0 {
        return Ok(current.clone());
    }
    if gamma == 1.0 {
        return Ok(ConvexCombination::single(atom));
    }
    let mut atoms: Vec<(f64, FunctionHandle)> = current
        .atoms
        .iter()
        .map(|(w, h)| ((1.0 - gamma) * w, h.clone()))
        .collect();
    atoms.push((gamma, atom));
    Ok(ConvexCombination { atoms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::Activation;

    fn atom(i: f64) -> FunctionHandle {
        FunctionHandle::ridge(Activation::Relu, vec![i, 1.0])
    }

    #[test]
    fn step_examples() {
        let a = atom(0.0);
        let b = atom(1.0);
        let start = ConvexCombination::single(a.clone());
        let mid = fw_step(&start, b.clone(), 2.0 / 3.0).unwrap();
        assert_eq!(mid.support_size(), 2);
        assert!((mid.atoms()[0].0 - 1.0 / 3.0).abs() < 1e-15);
        assert!((mid.atoms()[1].0 - 2.0 / 3.0).abs() < 1e-15);
        let same = fw_step(&mid, b.clone(), 0.0).unwrap();
        assert_eq!(same.support_size(), 2);
        let collapsed = fw_step(&mid, b.clone(), 1.0).unwrap();
        assert_eq!(collapsed.support_size(), 1);
        assert!(collapsed.atoms()[0].1.ptr_eq(&b));
        assert!(matches!(fw_step(&mid, b, 1.5), Err(Error::Contract(_))));
    }

    #[test]
    fn handle_matches_eval_bitwise() {
        let mut c = ConvexCombination::single(atom(0.3));
        for k in 0..6 {
            c = fw_step(&c, atom(k as f64 - 2.5), 2.0 / (k as f64 + 3.0)).unwrap();
        }
        let h = c.to_handle();
        for x in [[0.1, -0.4], [2.0, 1.0], [-3.0, 0.2]] {
            assert_eq!(h.eval(&x).to_bits(), c.eval(&x).to_bits());
        }
    }

    #[test]
    fn compact_merges_shared_atoms() {
        let a = atom(0.0);
        let b = atom(1.0);
        let mut c = ConvexCombination::single(a.clone());
        c = fw_step(&c, b.clone(), 0.5).unwrap();
        c = fw_step(&c, a.clone(), 0.25).unwrap();
        let merged = c.compact();
        assert_eq!(merged.support_size(), 2);
        assert!((merged.weight_sum() - 1.0).abs() < 1e-15);
        let x = [0.7, -0.2];
        assert!((merged.eval(&x) - c.eval(&x)).abs() < 1e-15);
    }
}
