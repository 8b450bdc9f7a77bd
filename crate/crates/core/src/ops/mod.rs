//! The 17 search operators and their neighborhoods.
//!
//! Operator catalog. Segment positions are 0-based; a segment `(start, len)`
//! in a route covers `route[start..start + len]`. Cut position `c` splits a
//! route into `route[..c]` (kept) and the tail `route[c..]` (moved). A move
//! is a member of an operator's neighborhood only if the rearranged plan
//! respects vehicle capacity; routes emptied by a move are dropped.
//!
//! | id    | name                       | routes | move |
//! |-------|----------------------------|--------|------|
//! | 1     | 2opt                       | 1      | reverse a section of length >= 2 |
//! | 2     | symmetric-exchange (intra) | 1      | swap two customers at positions i < j |
//! | 3     | relocate (intra)           | 1      | remove the customer at i, reinsert at slot j != i |
//! | 4     | cross / reverse-cross      | 2      | swap route tails at cuts (c1, c2), tails kept in order or reversed; the nothing-moves cut (len1, len2) is excluded, the reversed variant exists only when a tail has length >= 2 |
//! | 5-7   | symmetric-exchange         | 2      | swap equal-length sections, length 1 / 2 / 3 |
//! | 8-10  | relocate                   | 2      | move a section of length 1 / 2 / 3 into any slot of another route |
//! | 11    | cyclic-exchange            | 3      | rotate one customer among three routes: first -> second -> third -> first, each landing in the vacated position |
//! | 12-17 | asymmetric-exchange        | 2      | swap sections of lengths (1,2), (2,1), (1,3), (3,1), (2,3), (3,2); the first length applies to the lower-indexed route |
//!
//! Multi-route operators reference distinct routes. Two-route section
//! exchanges enumerate unordered route pairs (lower index first); relocates
//! enumerate ordered (source, destination) pairs; the cyclic exchange
//! enumerates each rotation class once (lowest route index first, the other
//! two in both orders).

mod apply;
mod enumerate;

pub use apply::{apply_move, move_delta};
pub use enumerate::enumerate_moves;
pub(crate) use enumerate::visit_moves;

use crate::rng::substream;
use crate::solution::{Evaluator, RoutePlan};
use rand::Rng;
use std::ops::ControlFlow;

/// A neighbor is an improvement only when it beats the current plan by more
/// than this margin, so floating-point noise cannot flip trapped status.
pub const IMPROVEMENT_EPS: f64 = 1e-12;

/// One of the 17 catalog operators, identified by its 1-based index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OperatorId(u8);

impl OperatorId {
    pub const COUNT: usize = 17;

    pub fn new(index: u8) -> Option<Self> {
        (1..=Self::COUNT as u8)
            .contains(&index)
            .then_some(OperatorId(index))
    }

    /// 1-based catalog index.
    pub fn index(self) -> u8 {
        self.0
    }

    /// The full catalog in index order.
    pub fn full_set() -> Vec<OperatorId> {
        (1..=Self::COUNT as u8).map(OperatorId).collect()
    }

    pub fn kind(self) -> OperatorKind {
        use OperatorKind::*;
        match self.0 {
            1 => TwoOpt,
            2 => IntraSwap,
            3 => IntraRelocate,
            4 => CrossReverse,
            5..=7 => InterSwap {
                len: self.0 as usize - 4,
            },
            8..=10 => InterRelocate {
                len: self.0 as usize - 7,
            },
            11 => CyclicExchange,
            12..=17 => {
                const PAIRS: [(usize, usize); 6] = [(1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)];
                let (a, b) = PAIRS[self.0 as usize - 12];
                AsymSwap {
                    len_first: a,
                    len_second: b,
                }
            }
            _ => unreachable!("OperatorId out of range"),
        }
    }

    pub fn name(self) -> &'static str {
        match self.kind() {
            OperatorKind::TwoOpt => "2opt",
            OperatorKind::IntraSwap => "symmetric-exchange-intra",
            OperatorKind::IntraRelocate => "relocate-intra",
            OperatorKind::CrossReverse => "cross-reverse",
            OperatorKind::InterSwap { .. } => "symmetric-exchange",
            OperatorKind::InterRelocate { .. } => "relocate",
            OperatorKind::CyclicExchange => "cyclic-exchange",
            OperatorKind::AsymSwap { .. } => "asymmetric-exchange",
        }
    }

    /// Number of routes a move of this operator touches.
    pub fn arity(self) -> usize {
        match self.kind() {
            OperatorKind::TwoOpt | OperatorKind::IntraSwap | OperatorKind::IntraRelocate => 1,
            OperatorKind::CyclicExchange => 3,
            _ => 2,
        }
    }

    /// Human- and machine-readable segment-length signature, `|`-separated
    /// so it stays a single CSV field.
    pub fn segment_lengths(self) -> String {
        match self.kind() {
            OperatorKind::TwoOpt => "2..".into(),
            OperatorKind::IntraSwap => "1|1".into(),
            OperatorKind::IntraRelocate => "1".into(),
            OperatorKind::CrossReverse => "tail".into(),
            OperatorKind::InterSwap { len } => format!("{len}|{len}"),
            OperatorKind::InterRelocate { len } => format!("{len}"),
            OperatorKind::CyclicExchange => "1|1|1".into(),
            OperatorKind::AsymSwap {
                len_first,
                len_second,
            } => format!("{len_first}|{len_second}"),
        }
    }
}

impl std::fmt::Display for OperatorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Structural family of an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    TwoOpt,
    IntraSwap,
    IntraRelocate,
    CrossReverse,
    InterSwap { len: usize },
    InterRelocate { len: usize },
    CyclicExchange,
    AsymSwap { len_first: usize, len_second: usize },
}

/// One concrete rearrangement, valid for the exact plan it was enumerated
/// from. Field meaning per operator kind is documented in the catalog above.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub op: OperatorId,
    pub(crate) routes: [u16; 3],
    pub(crate) starts: [u16; 3],
    pub(crate) lens: [u16; 3],
    pub(crate) reversed: bool,
}

impl Move {
    pub(crate) fn new(op: OperatorId) -> Self {
        Move {
            op,
            routes: [0; 3],
            starts: [0; 3],
            lens: [0; 3],
            reversed: false,
        }
    }

    pub fn routes(&self) -> &[u16] {
        &self.routes[..self.op.arity()]
    }

    pub fn starts(&self) -> &[u16] {
        let n = match self.op.kind() {
            OperatorKind::TwoOpt => 1,
            OperatorKind::CyclicExchange => 3,
            _ => 2,
        };
        &self.starts[..n]
    }

    pub fn reversed(&self) -> bool {
        self.reversed
    }
}

/// Neighbor acceptance discipline for a single operator application.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImproveMode {
    /// Scan the neighborhood in seeded random order, take the first strict
    /// improvement.
    FirstImprovement,
    /// Collect every strict improvement, return one uniformly at random.
    RandomImprovement,
}

/// Result of trying one operator on one plan.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub plan: RoutePlan,
    pub improved: bool,
    /// distance(new) - distance(old); negative iff improved, else 0.
    pub delta: f64,
}

/// Apply `op` to `plan` once. Returns the unchanged plan with
/// `improved = false` when the operator is trapped (no strictly better
/// neighbor exists).
pub fn improving_step(
    eval: &Evaluator,
    plan: &RoutePlan,
    op: OperatorId,
    mode: ImproveMode,
    seed: u64,
) -> StepOutcome {
    match mode {
        ImproveMode::FirstImprovement => {
            let moves = enumerate_moves(eval.instance(), plan, op, seed);
            for mv in &moves {
                let delta = move_delta(eval, plan, mv);
                if delta < -IMPROVEMENT_EPS {
                    return StepOutcome {
                        plan: apply::apply_unchecked(plan, mv),
                        improved: true,
                        delta,
                    };
                }
            }
            StepOutcome {
                plan: plan.clone(),
                improved: false,
                delta: 0.0,
            }
        }
        ImproveMode::RandomImprovement => {
            let mut rng = substream(seed, "improve-pick");
            let mut chosen: Option<(Move, f64)> = None;
            let mut count = 0u64;
            let _ = visit_moves(eval.instance(), plan, op, &mut |mv| {
                let delta = move_delta(eval, plan, &mv);
                if delta < -IMPROVEMENT_EPS {
                    count += 1;
                    if rng.random_range(0..count) == 0 {
                        chosen = Some((mv, delta));
                    }
                }
                ControlFlow::<()>::Continue(())
            });
            match chosen {
                Some((mv, delta)) => StepOutcome {
                    plan: apply::apply_unchecked(plan, &mv),
                    improved: true,
                    delta,
                },
                None => StepOutcome {
                    plan: plan.clone(),
                    improved: false,
                    delta: 0.0,
                },
            }
        }
    }
}

/// True iff no move of `op` strictly decreases the plan distance. Exits on
/// the first improvement found.
pub fn is_trapped(eval: &Evaluator, plan: &RoutePlan, op: OperatorId) -> bool {
    let flow = visit_moves(eval.instance(), plan, op, &mut |mv| {
        if move_delta(eval, plan, &mv) < -IMPROVEMENT_EPS {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    flow.is_continue()
}
