//! Outer local-search drivers: probability-guided operator selection per
//! iteration, improving-only acceptance, full per-iteration tracing, and a
//! relocation kick once every operator is trapped on the current solution.

use crate::aos::{credit, select_operator, PolicyKind, PolicyParams, PolicyState};
use crate::aos_loc::{modulate, update_trapped_set, TrappedSet};
use crate::error::LocError;
use crate::instance::Instance;
use crate::loc::LocMatrix;
use crate::ops::{improving_step, ImproveMode, OperatorId};
use crate::rng::substream;
use crate::solution::{initial_solution, Evaluator, RoutePlan};
use rand::Rng;

/// Random single-customer relocations applied when every operator is
/// trapped.
pub const DEFAULT_PERTURBATION_STRENGTH: usize = 5;

/// Iteration budget for generated instances.
pub const DEFAULT_BUDGET_GENERATED: usize = 40_000;
/// Iteration budget for loaded benchmark instances.
pub const DEFAULT_BUDGET_BENCHMARK: usize = 2_000;

/// Settings for one search run.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub max_ite: usize,
    pub policy: PolicyKind,
    pub params: PolicyParams,
    pub seed: u64,
    pub perturbation_strength: usize,
}

impl SearchConfig {
    pub fn new(policy: PolicyKind, max_ite: usize, seed: u64) -> Self {
        assert!(max_ite >= 1, "budget must be at least one iteration");
        SearchConfig {
            max_ite,
            policy,
            params: PolicyParams::default(),
            seed,
            perturbation_strength: DEFAULT_PERTURBATION_STRENGTH,
        }
    }
}

/// One iteration of a search trace. `distance` is the tour length after the
/// accepted move and before any end-of-iteration perturbation; `perturbed`
/// marks iterations whose end state was kicked.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub ite: usize,
    pub op: OperatorId,
    pub reward: f64,
    pub trapped: bool,
    pub distance: f64,
    pub probs: Vec<f64>,
    pub perturbed: bool,
}

/// Full log of a search run.
#[derive(Debug, Clone)]
pub struct SearchTrace {
    pub records: Vec<IterationRecord>,
    pub best_plan: RoutePlan,
    pub best_distance: f64,
    pub final_distance: f64,
    pub initial_distance: f64,
    /// Times an operator was selected while the trapped set was non-empty
    /// and then proved trapped itself.
    pub trapped_after_trapped_count: usize,
    pub perturbation_count: usize,
}

/// Run the plain selection loop: decide probabilities, draw an operator,
/// take its first improving neighbor (or confirm it trapped), credit the
/// improvement, update the policy. Deterministic per seed.
pub fn run_base(eval: &Evaluator, ops: &[OperatorId], config: &SearchConfig) -> SearchTrace {
    run(eval, ops, config, None).expect("no correlation matrix to mismatch")
}

/// As `run_base`, but probabilities pass through the correlation-driven
/// modulation before each draw. Uses the same labeled random substreams as
/// the base run, so paired comparisons share initial solutions.
pub fn run_loc_assisted(
    eval: &Evaluator,
    ops: &[OperatorId],
    config: &SearchConfig,
    loc: &LocMatrix,
) -> Result<SearchTrace, LocError> {
    run(eval, ops, config, Some(loc))
}

fn run(
    eval: &Evaluator,
    ops: &[OperatorId],
    config: &SearchConfig,
    loc: Option<&LocMatrix>,
) -> Result<SearchTrace, LocError> {
    assert!(!ops.is_empty(), "empty operator set");
    assert!(config.max_ite >= 1, "budget must be at least one iteration");
    if let Some(loc) = loc {
        if loc.dim() != ops.len() {
            return Err(LocError::DimensionMismatch {
                a: loc.dim(),
                b: ops.len(),
            });
        }
    }

    let inst = eval.instance();
    let seed = config.seed;
    let mut plan = initial_solution(inst, inst.fleet_lower_bound(), seed);
    let mut select_rng = substream(seed, "select");
    let mut enum_rng = substream(seed, "enum");
    let mut perturb_rng = substream(seed, "perturb");
    let mut policy = PolicyState::new(config.policy, ops.len(), config.params);
    let mut lo = TrappedSet::new();

    let mut distance = eval.plan_distance(&plan);
    let initial_distance = distance;
    let mut best_plan = plan.clone();
    let mut best_distance = distance;
    let mut trapped_after_trapped_count = 0;
    let mut perturbation_count = 0;
    let mut records = Vec::with_capacity(config.max_ite);

    for ite in 1..=config.max_ite {
        let mut probs = policy.decision_making();
        if let Some(loc) = loc {
            probs = modulate(&probs, &lo, loc);
        }
        let op_pos = select_operator(&probs, &mut select_rng);
        let step_seed: u64 = enum_rng.random();
        let outcome = improving_step(
            eval,
            &plan,
            ops[op_pos],
            ImproveMode::FirstImprovement,
            step_seed,
        );

        let new_distance = distance + outcome.delta;
        let reward = credit(distance, new_distance);
        policy.record_update(op_pos, reward);

        let trapped = !outcome.improved;
        if trapped && !lo.is_empty() {
            trapped_after_trapped_count += 1;
        }
        lo = update_trapped_set(&lo, op_pos, reward);

        plan = outcome.plan;
        distance = new_distance;
        if distance < best_distance {
            best_distance = distance;
            best_plan = plan.clone();
        }

        let perturbed = lo.len() == ops.len();
        records.push(IterationRecord {
            ite,
            op: ops[op_pos],
            reward,
            trapped,
            distance,
            probs,
            perturbed,
        });
        if perturbed {
            plan = perturb(inst, &plan, config.perturbation_strength, &mut perturb_rng);
            distance = eval.plan_distance(&plan);
            lo.clear();
            perturbation_count += 1;
        }
    }

    let final_distance = records.last().map_or(initial_distance, |r| r.distance);
    Ok(SearchTrace {
        records,
        best_plan,
        best_distance,
        final_distance,
        initial_distance,
        trapped_after_trapped_count,
        perturbation_count,
    })
}

/// Apply `strength` random feasible single-customer relocations (intra- or
/// inter-route). Relocations with no feasible target are skipped; emptied
/// routes are dropped from the result.
pub fn perturb<R: Rng>(
    inst: &Instance,
    plan: &RoutePlan,
    strength: usize,
    rng: &mut R,
) -> RoutePlan {
    let mut routes = plan.routes().to_vec();
    let capacity = inst.capacity();
    for _ in 0..strength {
        let positions: Vec<(usize, usize)> = routes
            .iter()
            .enumerate()
            .flat_map(|(r, route)| (0..route.len()).map(move |i| (r, i)))
            .collect();
        if positions.is_empty() {
            break;
        }
        let (r, i) = positions[rng.random_range(0..positions.len())];
        let node = routes[r][i];
        let demand = inst.demand(node);
        let mut targets: Vec<(usize, usize)> = Vec::new();
        for (r2, route2) in routes.iter().enumerate() {
            if r2 == r {
                // slots of the route with position i removed
                for slot in 0..route2.len() {
                    if slot != i {
                        targets.push((r2, slot));
                    }
                }
            } else {
                let load: f64 = route2.iter().map(|&n| inst.demand(n)).sum();
                if load + demand <= capacity {
                    for slot in 0..=route2.len() {
                        targets.push((r2, slot));
                    }
                }
            }
        }
        if targets.is_empty() {
            continue;
        }
        let (tr, slot) = targets[rng.random_range(0..targets.len())];
        routes[r].remove(i);
        routes[tr].insert(slot, node);
    }
    RoutePlan::new(routes)
}
