//! Stateless adaptive operator selection.
//!
//! Two classic probability-based selection rules over a decayed per-operator
//! quality estimate, plus a uniform baseline:
//!
//! * probability matching: P_i = p_min + (1 - K * p_min) * Q_i / sum(Q)
//! * adaptive pursuit: the argmax-Q operator's probability is pulled toward
//!   p_max = 1 - (K - 1) * p_min at rate beta, all others toward p_min
//!
//! Quality updates use the recurrence Q_i <- alpha * r + (1 - alpha) * Q_i
//! on the selected operator only.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Which selection rule a policy runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Uniform,
    Pm,
    Ap,
}

impl PolicyKind {
    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::Uniform => "uniform",
            PolicyKind::Pm => "pm",
            PolicyKind::Ap => "ap",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(PolicyKind::Uniform),
            "pm" => Ok(PolicyKind::Pm),
            "ap" => Ok(PolicyKind::Ap),
            other => Err(format!("unknown policy kind `{other}`")),
        }
    }
}

/// Tunable policy parameters. `p_min` defaults to 0.5 / (K - 1) when unset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub alpha: f64,
    pub beta: f64,
    pub p_min: Option<f64>,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            alpha: 0.2,
            beta: 0.2,
            p_min: None,
        }
    }
}

/// Quality and probability state for one search run. Operators are addressed
/// by 0-based position in the run's operator list.
#[derive(Debug, Clone)]
pub struct PolicyState {
    kind: PolicyKind,
    quality: Vec<f64>,
    probs: Vec<f64>,
    alpha: f64,
    beta: f64,
    p_min: f64,
}

impl PolicyState {
    /// Quality starts at 1 everywhere (so the first decision is uniform) and
    /// the stored probability vector starts uniform.
    pub fn new(kind: PolicyKind, n_ops: usize, params: PolicyParams) -> Self {
        assert!(n_ops >= 1, "need at least one operator");
        let p_min = params.p_min.unwrap_or_else(|| {
            if n_ops > 1 {
                0.5 / (n_ops as f64 - 1.0)
            } else {
                1.0
            }
        });
        assert!(
            p_min > 0.0 && p_min <= 1.0 / n_ops as f64,
            "p_min {p_min} outside (0, 1/K]"
        );
        assert!(
            params.alpha > 0.0 && params.alpha <= 1.0,
            "alpha outside (0, 1]"
        );
        assert!(
            params.beta > 0.0 && params.beta <= 1.0,
            "beta outside (0, 1]"
        );
        PolicyState {
            kind,
            quality: vec![1.0; n_ops],
            probs: vec![1.0 / n_ops as f64; n_ops],
            alpha: params.alpha,
            beta: params.beta,
            p_min,
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn n_ops(&self) -> usize {
        self.quality.len()
    }

    pub fn quality(&self) -> &[f64] {
        &self.quality
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        1.0 - (self.n_ops() as f64 - 1.0) * self.p_min
    }

    /// Fold `reward` into the selected operator's quality estimate.
    /// No-op for the uniform baseline.
    pub fn record_update(&mut self, op_pos: usize, reward: f64) {
        debug_assert!(reward >= 0.0);
        if self.kind == PolicyKind::Uniform {
            return;
        }
        self.quality[op_pos] = self.alpha * reward + (1.0 - self.alpha) * self.quality[op_pos];
    }

    /// Recompute (PM, uniform) or pursue (AP) the selection probabilities
    /// and return the vector to draw from.
    pub fn decision_making(&mut self) -> Vec<f64> {
        let k = self.n_ops() as f64;
        match self.kind {
            PolicyKind::Uniform => {
                self.probs.fill(1.0 / k);
            }
            PolicyKind::Pm => {
                let total: f64 = self.quality.iter().sum();
                let scale = 1.0 - k * self.p_min;
                for (p, &q) in self.probs.iter_mut().zip(&self.quality) {
                    let ratio = if total > 0.0 { q / total } else { 1.0 / k };
                    *p = self.p_min + scale * ratio;
                }
            }
            PolicyKind::Ap => {
                // argmax of Q, earliest index on ties
                let best = self
                    .quality
                    .iter()
                    .enumerate()
                    .max_by(|(ia, a), (ib, b)| {
                        a.partial_cmp(b).expect("finite quality").then(ib.cmp(ia))
                    })
                    .map(|(i, _)| i)
                    .expect("non-empty");
                let p_max = self.p_max();
                for (i, p) in self.probs.iter_mut().enumerate() {
                    let target = if i == best { p_max } else { self.p_min };
                    *p = self.beta * target + (1.0 - self.beta) * *p;
                }
            }
        }
        self.probs.clone()
    }
}

/// Fitness-improvement credit for a minimisation step: positive exactly when
/// the step strictly reduced the objective.
pub fn credit(f_before: f64, f_after: f64) -> f64 {
    (f_before - f_after).max(0.0)
}

/// Draw an operator position from a probability vector by inverse CDF on a
/// single uniform variate. Deterministic given the stream state.
pub fn select_operator<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    assert!(total > 0.0, "degenerate probability vector");
    let mut point = rng.random::<f64>() * total;
    for (i, &p) in probs.iter().enumerate() {
        point -= p;
        if point <= 0.0 {
            return i;
        }
    }
    probs.len() - 1
}
