//! Correlation-assisted selection: damp the probability of operators whose
//! local optima correlate with operators already confirmed trapped on the
//! current solution.

use crate::loc::LocMatrix;
use std::collections::BTreeSet;

/// Operators confirmed trapped on the current solution since the last
/// improving step. 0-based positions into the run's operator list; iteration
/// order is ascending so modulation is reproducible.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrappedSet {
    members: BTreeSet<usize>,
}

impl TrappedSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, op_pos: usize) -> bool {
        self.members.contains(&op_pos)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn clear(&mut self) {
        self.members.clear();
    }

    pub fn insert(&mut self, op_pos: usize) {
        self.members.insert(op_pos);
    }
}

/// A positive reward empties the set; a zero reward marks the tried
/// operator as trapped.
pub fn update_trapped_set(lo: &TrappedSet, op_pos: usize, reward: f64) -> TrappedSet {
    let mut next = if reward > 0.0 {
        TrappedSet::new()
    } else {
        lo.clone()
    };
    if reward <= 0.0 {
        next.insert(op_pos);
    }
    next
}

/// For each trapped operator i, multiply the probabilities elementwise by
/// (1 - loc[i][j]) and renormalise. Factors live in [0, 2] since LOC entries
/// are clamped into [-1, 1]. If the products annihilate the whole vector,
/// fall back to uniform over operators outside the trapped set (uniform over
/// all when every operator is in it).
pub fn modulate(probs: &[f64], lo: &TrappedSet, loc: &LocMatrix) -> Vec<f64> {
    assert_eq!(
        probs.len(),
        loc.dim(),
        "probability/matrix dimension mismatch"
    );
    let mut out = probs.to_vec();
    for i in lo.iter() {
        let row = loc.row(i);
        for (p, &corr) in out.iter_mut().zip(row) {
            *p *= (1.0 - corr).clamp(0.0, 2.0);
        }
    }
    let sum: f64 = out.iter().sum();
    if sum <= 1e-15 {
        let free = out.len() - lo.len();
        if free > 0 {
            let share = 1.0 / free as f64;
            for (j, p) in out.iter_mut().enumerate() {
                *p = if lo.contains(j) { 0.0 } else { share };
            }
        } else {
            out.fill(1.0 / probs.len() as f64);
        }
    } else {
        for p in &mut out {
            *p /= sum;
        }
    }
    out
}
