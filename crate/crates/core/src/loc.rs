//! Local-optima correlation: which operators get trapped together.
//!
//! A trap vector records, per operator, whether a solution is a local
//! optimum of that operator's neighborhood (+1) or not (-1). Stacking trap
//! vectors over a sampled solution trajectory gives a trap matrix; the
//! correlation of its columns is the local-optima correlation (LOC) matrix.
//! Two LOC matrices are compared by the mean row-wise Kendall tau-b.

use crate::error::LocError;
use crate::ops::{self, OperatorId, IMPROVEMENT_EPS};
use crate::rng::substream;
use crate::search::{perturb, DEFAULT_PERTURBATION_STRENGTH};
use crate::solution::{initial_solution, Evaluator, RoutePlan};
use rand::Rng;
use std::cmp::Ordering;
use std::ops::ControlFlow;

/// Per-operator trapped flags for one solution: +1 trapped, -1 not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrapVector(Vec<i8>);

impl TrapVector {
    pub fn new(entries: Vec<i8>) -> Result<Self, LocError> {
        if let Some(bad) = entries.iter().find(|e| **e != 1 && **e != -1) {
            return Err(LocError::Csv {
                message: format!("trap entry {bad} is not +1 or -1"),
                line: 0,
            });
        }
        Ok(TrapVector(entries))
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn all_trapped(&self) -> bool {
        self.0.iter().all(|&e| e == 1)
    }
}

/// One trap vector per sampled solution; all rows the same width.
#[derive(Debug, Clone, Default)]
pub struct TrapMatrix {
    rows: Vec<TrapVector>,
}

impl TrapMatrix {
    pub fn push(&mut self, row: TrapVector) {
        if let Some(first) = self.rows.first() {
            assert_eq!(first.len(), row.len(), "trap rows must share a width");
        }
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[TrapVector] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_ops(&self) -> usize {
        self.rows.first().map_or(0, TrapVector::len)
    }
}

/// Symmetric K x K correlation matrix with unit diagonal, stored dense in
/// row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct LocMatrix {
    k: usize,
    values: Vec<f64>,
}

impl LocMatrix {
    /// Build from rows, clamping entries into [-1, 1]. Rounding noise in
    /// external files must not push modulation factors outside [0, 2].
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, LocError> {
        let k = rows.len();
        let mut values = Vec::with_capacity(k * k);
        for row in &rows {
            if row.len() != k {
                return Err(LocError::DimensionMismatch { a: k, b: row.len() });
            }
            values.extend(row.iter().map(|v| v.clamp(-1.0, 1.0)));
        }
        Ok(LocMatrix { k, values })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    /// Elementwise mean of several same-size matrices.
    pub fn mean(matrices: &[LocMatrix]) -> Result<LocMatrix, LocError> {
        let first = matrices.first().ok_or(LocError::EmptyTrapMatrix)?;
        let k = first.dim();
        let mut acc = vec![0.0; k * k];
        for m in matrices {
            if m.dim() != k {
                return Err(LocError::DimensionMismatch { a: k, b: m.dim() });
            }
            for (a, v) in acc.iter_mut().zip(&m.values) {
                *a += v;
            }
        }
        let n = matrices.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        Ok(LocMatrix { k, values: acc })
    }
}

/// Trapped status of `plan` under every operator in `ops`.
pub fn trap_vector(eval: &Evaluator, plan: &RoutePlan, ops: &[OperatorId]) -> TrapVector {
    TrapVector(
        ops.iter()
            .map(|&op| {
                if ops::is_trapped(eval, plan, op) {
                    1
                } else {
                    -1
                }
            })
            .collect(),
    )
}

/// Column correlation of a trap matrix: entry (i, j) is the mean product of
/// the +/-1 flags of operators i and j over all recorded solutions. The
/// result is symmetric with an exactly unit diagonal.
pub fn loc_matrix(traps: &TrapMatrix) -> Result<LocMatrix, LocError> {
    let n = traps.n_rows();
    if n == 0 {
        return Err(LocError::EmptyTrapMatrix);
    }
    let k = traps.n_ops();
    let mut values = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let sum: i64 = traps
                .rows()
                .iter()
                .map(|row| i64::from(row.entries()[i]) * i64::from(row.entries()[j]))
                .sum();
            let v = sum as f64 / n as f64;
            values[i * k + j] = v;
            values[j * k + i] = v;
        }
    }
    Ok(LocMatrix { k, values })
}

/// A sampled trap matrix plus walk accounting.
pub struct SampleOutcome {
    pub traps: TrapMatrix,
    /// Sampling steps executed (the iteration budget).
    pub steps: usize,
    /// Steps on which every operator was trapped; those solutions are not
    /// recorded and the walk was kicked by a perturbation instead.
    pub all_trapped_steps: usize,
}

/// Walk `max_ite` steps from a seeded initial solution, recording the trap
/// vector of every visited solution on which at least one operator can still
/// improve. The walk then moves to a neighbor drawn uniformly from the union
/// of all operators' strictly improving neighbors. Deterministic per seed.
pub fn sample_trap_matrix(
    eval: &Evaluator,
    ops: &[OperatorId],
    max_ite: usize,
    seed: u64,
) -> SampleOutcome {
    let inst = eval.instance();
    let mut plan = initial_solution(inst, inst.fleet_lower_bound(), seed);
    let mut pick_rng = substream(seed, "sample-pick");
    let mut perturb_rng = substream(seed, "perturb");
    let mut traps = TrapMatrix::default();
    let mut all_trapped_steps = 0;

    for _ in 0..max_ite {
        let mut entries = vec![1i8; ops.len()];
        let mut improving = 0u64;
        let mut chosen: Option<ops::Move> = None;
        for (pos, &op) in ops.iter().enumerate() {
            let _ = ops::visit_moves(inst, &plan, op, &mut |mv| {
                if ops::move_delta(eval, &plan, &mv) < -IMPROVEMENT_EPS {
                    entries[pos] = -1;
                    improving += 1;
                    if pick_rng.random_range(0..improving) == 0 {
                        chosen = Some(mv);
                    }
                }
                ControlFlow::<()>::Continue(())
            });
        }
        match chosen {
            Some(mv) => {
                traps.push(TrapVector(entries));
                plan = ops::apply_move(&plan, &mv).expect("move enumerated on this plan");
            }
            None => {
                all_trapped_steps += 1;
                plan = perturb(inst, &plan, DEFAULT_PERTURBATION_STRENGTH, &mut perturb_rng);
            }
        }
    }

    SampleOutcome {
        traps,
        steps: max_ite,
        all_trapped_steps,
    }
}

/// Kendall rank correlation with tie correction (tau-b). `None` when either
/// sequence is constant, where the coefficient is undefined.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mut concordant = 0u64;
    let mut discordant = 0u64;
    let mut tied_x = 0u64;
    let mut tied_y = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i].partial_cmp(&x[j]).expect("finite values");
            let dy = y[i].partial_cmp(&y[j]).expect("finite values");
            match (dx, dy) {
                (Ordering::Equal, Ordering::Equal) => {
                    tied_x += 1;
                    tied_y += 1;
                }
                (Ordering::Equal, _) => tied_x += 1,
                (_, Ordering::Equal) => tied_y += 1,
                (a, b) if a == b => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as f64;
    let denom = ((n0 - tied_x as f64) * (n0 - tied_y as f64)).sqrt();
    if denom == 0.0 {
        return None;
    }
    Some(((concordant as f64 - discordant as f64) / denom).clamp(-1.0, 1.0))
}

/// Similarity of two same-size LOC matrices: mean over rows of the Kendall
/// tau-b between corresponding rows. A row pair with an undefined
/// coefficient (constant row) contributes 0.
pub fn kendall_similarity(a: &LocMatrix, b: &LocMatrix) -> Result<f64, LocError> {
    if a.dim() != b.dim() {
        return Err(LocError::DimensionMismatch {
            a: a.dim(),
            b: b.dim(),
        });
    }
    let k = a.dim();
    if k == 0 {
        return Err(LocError::EmptyTrapMatrix);
    }
    let total: f64 = (0..k)
        .map(|i| kendall_tau_b(a.row(i), b.row(i)).unwrap_or(0.0))
        .sum();
    Ok(total / k as f64)
}

/// LOC matrix CSV: a header row of operator ids, then K rows of K values at
/// 17 significant digits, so a write/read cycle is bit-stable.
pub fn write_loc_csv(matrix: &LocMatrix, ops: &[OperatorId]) -> String {
    assert_eq!(matrix.dim(), ops.len(), "operator list must match matrix");
    let mut out = String::new();
    let header: Vec<String> = ops.iter().map(|o| o.to_string()).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..matrix.dim() {
        let row: Vec<String> = matrix.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_loc_csv(text: &str) -> Result<(LocMatrix, Vec<OperatorId>), LocError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(LocError::Csv {
        message: "empty file".into(),
        line: 1,
    })?;
    let ops: Vec<OperatorId> = header
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u8>()
                .ok()
                .and_then(OperatorId::new)
                .ok_or(LocError::Csv {
                    message: format!("bad operator id `{tok}`"),
                    line: 1,
                })
        })
        .collect::<Result<_, _>>()?;
    let k = ops.len();
    let mut rows = Vec::with_capacity(k);
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| LocError::Csv {
                    message: format!("bad value `{tok}`"),
                    line: idx + 1,
                })
            })
            .collect::<Result<_, _>>()?;
        if row.len() != k {
            return Err(LocError::Csv {
                message: format!("expected {k} values, found {}", row.len()),
                line: idx + 1,
            });
        }
        rows.push(row);
    }
    if rows.len() != k {
        return Err(LocError::Csv {
            message: format!("expected {k} rows, found {}", rows.len()),
            line: text.lines().count(),
        });
    }
    Ok((LocMatrix::from_rows(rows)?, ops))
}

/// Trap matrix CSV: one +/-1 row per recorded solution, no header.
pub fn write_trap_csv(traps: &TrapMatrix) -> String {
    let mut out = String::new();
    for row in traps.rows() {
        let cells: Vec<String> = row.entries().iter().map(|e| e.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_uniform_instance, Instance, UniformSpec};
    use proptest::prelude::*;

    fn tm(rows: Vec<Vec<i8>>) -> TrapMatrix {
        let mut t = TrapMatrix::default();
        for r in rows {
            t.push(TrapVector(r));
        }
        t
    }

    #[test]
    fn identical_columns_correlate_to_one() {
        let t = tm(vec![vec![1, 1], vec![-1, -1], vec![1, 1]]);
        let m = loc_matrix(&t).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
    }

    #[test]
    fn opposite_columns_correlate_to_minus_one() {
        let t = tm(vec![vec![1, -1], vec![-1, 1], vec![1, -1]]);
        let m = loc_matrix(&t).unwrap();
        assert_eq!(m.get(0, 1), -1.0);
    }

    #[test]
    fn balanced_columns_are_uncorrelated() {
        let t = tm(vec![vec![1, 1], vec![1, -1], vec![-1, 1], vec![-1, -1]]);
        let m = loc_matrix(&t).unwrap();
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn empty_trap_matrix_is_an_error() {
        assert_eq!(
            loc_matrix(&TrapMatrix::default()).unwrap_err(),
            LocError::EmptyTrapMatrix
        );
    }

    #[test]
    fn single_customer_instance_is_trapped_everywhere() {
        let inst = Instance::new(
            "one",
            0,
            vec![(0.0, 0.0), (1.0, 1.0)],
            vec![0.0, 1.0],
            5.0,
            None,
        )
        .unwrap();
        let eval = Evaluator::new(&inst);
        let plan = RoutePlan::new(vec![vec![1]]);
        let tv = trap_vector(&eval, &plan, &OperatorId::full_set());
        assert!(tv.all_trapped());
    }

    #[test]
    fn known_improving_two_opt_flips_the_entry() {
        // Visiting (1,0), (0,1), (1,1) in that order crosses the tour;
        // reversing the last two visits uncrosses it.
        let inst = Instance::new(
            "cross",
            0,
            vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)],
            vec![0.0, 1.0, 1.0, 1.0],
            5.0,
            None,
        )
        .unwrap();
        let eval = Evaluator::new(&inst);
        let plan = RoutePlan::new(vec![vec![1, 2, 3]]);
        let better = RoutePlan::new(vec![vec![1, 3, 2]]);
        assert!(eval.plan_distance(&better) < eval.plan_distance(&plan));
        let tv = trap_vector(&eval, &plan, &OperatorId::full_set());
        assert_eq!(tv.entries()[0], -1);
    }

    #[test]
    fn trap_vector_agrees_with_per_operator_checks() {
        let ops = OperatorId::full_set();
        for seed in 0..50 {
            let spec = UniformSpec {
                n_customers: 8,
                capacity: 10.0,
                demand_lo: 1,
                demand_hi: 4,
            };
            let inst = generate_uniform_instance(&spec, seed).unwrap();
            let eval = Evaluator::new(&inst);
            let plan = initial_solution(&inst, inst.fleet_lower_bound(), seed);
            let tv = trap_vector(&eval, &plan, &ops);
            for (pos, &op) in ops.iter().enumerate() {
                let expect = if ops::is_trapped(&eval, &plan, op) {
                    1
                } else {
                    -1
                };
                assert_eq!(tv.entries()[pos], expect);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_never_records_all_trapped() {
        let spec = UniformSpec {
            n_customers: 12,
            capacity: 20.0,
            demand_lo: 1,
            demand_hi: 5,
        };
        let inst = generate_uniform_instance(&spec, 3).unwrap();
        let eval = Evaluator::new(&inst);
        let ops = OperatorId::full_set();
        let a = sample_trap_matrix(&eval, &ops, 30, 11);
        let b = sample_trap_matrix(&eval, &ops, 30, 11);
        assert_eq!(a.traps.rows(), b.traps.rows());
        assert_eq!(a.steps, 30);
        assert!(a.traps.rows().iter().all(|r| !r.all_trapped()));
        assert_eq!(a.traps.n_rows() + a.all_trapped_steps, 30);
    }

    #[test]
    fn sampling_one_step_contract() {
        let spec = UniformSpec {
            n_customers: 10,
            capacity: 20.0,
            demand_lo: 1,
            demand_hi: 5,
        };
        let inst = generate_uniform_instance(&spec, 5).unwrap();
        let eval = Evaluator::new(&inst);
        let out = sample_trap_matrix(&eval, &OperatorId::full_set(), 1, 2);
        assert!(out.traps.n_rows() <= 1);
        for row in out.traps.rows() {
            assert!(row.entries().iter().all(|&e| e == 1 || e == -1));
        }
    }

    #[test]
    fn kendall_identity_and_negation() {
        let a = LocMatrix::from_rows(vec![
            vec![1.0, 0.5, 0.2],
            vec![0.5, 1.0, 0.3],
            vec![0.2, 0.3, 1.0],
        ])
        .unwrap();
        assert_eq!(kendall_similarity(&a, &a).unwrap(), 1.0);
        let neg = LocMatrix::from_rows(
            (0..3)
                .map(|i| a.row(i).iter().map(|v| -v).collect())
                .collect(),
        )
        .unwrap();
        assert_eq!(kendall_similarity(&a, &neg).unwrap(), -1.0);
    }

    #[test]
    fn kendall_matches_hand_computed_discordant_rows() {
        // One discordant pair per row: tau per row is (2 - 1) / 3.
        let a = LocMatrix::from_rows(vec![
            vec![1.0, 0.5, 0.2],
            vec![0.5, 1.0, 0.3],
            vec![0.2, 0.3, 1.0],
        ])
        .unwrap();
        let b = LocMatrix::from_rows(vec![
            vec![1.0, 0.2, 0.5],
            vec![0.3, 1.0, 0.5],
            vec![0.3, 0.2, 1.0],
        ])
        .unwrap();
        let expected = 1.0 / 3.0;
        assert!((kendall_similarity(&a, &b).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn constant_rows_contribute_zero() {
        let a = LocMatrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let b = LocMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(kendall_similarity(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn loc_csv_round_trips_bit_stably() {
        let t = tm(vec![vec![1, -1, 1], vec![-1, -1, 1], vec![1, 1, -1]]);
        let m = loc_matrix(&t).unwrap();
        let ops: Vec<OperatorId> = [1, 2, 3]
            .iter()
            .map(|&i| OperatorId::new(i).unwrap())
            .collect();
        let text = write_loc_csv(&m, &ops);
        let (back, back_ops) = parse_loc_csv(&text).unwrap();
        assert_eq!(back_ops, ops);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(back.get(i, j).to_bits(), m.get(i, j).to_bits());
            }
        }
        assert_eq!(write_loc_csv(&back, &back_ops), text);
    }

    #[test]
    fn loc_csv_rejects_ragged_input() {
        assert!(parse_loc_csv("1,2\n0.0,1.0\n").is_err());
        assert!(parse_loc_csv("1,2\n1.0\n0.0,1.0\n").is_err());
    }

    proptest! {
        // Implementation vs the naive double-loop correlation.
        #[test]
        fn loc_matrix_matches_naive_oracle(
            rows in prop::collection::vec(
                prop::collection::vec(prop::bool::ANY, 6), 1..30)
        ) {
            let t = tm(rows
                .iter()
                .map(|r| r.iter().map(|&b| if b { 1 } else { -1 }).collect())
                .collect());
            let m = loc_matrix(&t).unwrap();
            let n = t.n_rows() as f64;
            for i in 0..6 {
                for j in 0..6 {
                    let mut sum = 0.0;
                    for row in t.rows() {
                        sum += f64::from(row.entries()[i]) * f64::from(row.entries()[j]);
                    }
                    let naive = sum / n;
                    prop_assert!((m.get(i, j) - naive).abs() <= 1e-12);
                    prop_assert!((-1.0..=1.0).contains(&m.get(i, j)));
                    prop_assert_eq!(m.get(i, j), m.get(j, i));
                }
                prop_assert_eq!(m.get(i, i), 1.0);
            }
        }

        #[test]
        fn loc_matrix_is_permutation_equivariant(
            rows in prop::collection::vec(prop::collection::vec(prop::bool::ANY, 5), 1..20),
            swap_a in 0usize..5,
            swap_b in 0usize..5,
        ) {
            let base = tm(rows
                .iter()
                .map(|r| r.iter().map(|&b| if b { 1 } else { -1 }).collect())
                .collect());
            let permuted = tm(base
                .rows()
                .iter()
                .map(|r| {
                    let mut e = r.entries().to_vec();
                    e.swap(swap_a, swap_b);
                    e
                })
                .collect());
            let m = loc_matrix(&base).unwrap();
            let p = loc_matrix(&permuted).unwrap();
            let map = |i: usize| if i == swap_a { swap_b } else if i == swap_b { swap_a } else { i };
            for i in 0..5 {
                for j in 0..5 {
                    prop_assert_eq!(p.get(i, j), m.get(map(i), map(j)));
                }
            }
        }

        #[test]
        fn kendall_similarity_is_symmetric_and_bounded(
            a in prop::collection::vec(prop::collection::vec(-1.0f64..=1.0, 4), 4),
            b in prop::collection::vec(prop::collection::vec(-1.0f64..=1.0, 4), 4),
        ) {
            let ma = LocMatrix::from_rows(a).unwrap();
            let mb = LocMatrix::from_rows(b).unwrap();
            let ab = kendall_similarity(&ma, &mb).unwrap();
            let ba = kendall_similarity(&mb, &ma).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&ab));
        }
    }
}
