//! Route plans, distance evaluation and seeded construction.

use crate::error::PlanError;
use crate::instance::Instance;
use crate::rng::substream;
use rand::seq::SliceRandom;

/// A feasible CVRP solution: depot-anchored customer sequences. The depot is
/// implicit — every route starts and ends there. Empty routes are dropped on
/// construction, and plans are immutable afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RoutePlan {
    routes: Vec<Vec<usize>>,
}

impl RoutePlan {
    pub fn new(routes: Vec<Vec<usize>>) -> Self {
        RoutePlan {
            routes: routes.into_iter().filter(|r| !r.is_empty()).collect(),
        }
    }

    pub fn routes(&self) -> &[Vec<usize>] {
        &self.routes
    }

    pub fn n_routes(&self) -> usize {
        self.routes.len()
    }

    pub fn route(&self, idx: usize) -> &[usize] {
        &self.routes[idx]
    }

    pub fn n_customers(&self) -> usize {
        self.routes.iter().map(Vec::len).sum()
    }

    /// Routes sorted lexicographically; plans that differ only in route
    /// order or naming compare equal through this form.
    pub fn canonical(&self) -> Vec<Vec<usize>> {
        let mut rs = self.routes.clone();
        rs.sort();
        rs
    }

    /// Check every plan invariant against an instance: exact coverage of all
    /// customers, per-route capacity, no depot visits, no empty routes.
    pub fn validate(&self, inst: &Instance) -> Result<(), PlanError> {
        let mut seen = vec![0usize; inst.n_nodes()];
        for (ri, route) in self.routes.iter().enumerate() {
            if route.is_empty() {
                return Err(PlanError::EmptyRoute(ri));
            }
            let mut load = 0.0;
            for &node in route {
                if node >= inst.n_nodes() {
                    return Err(PlanError::UnknownNode { route: ri, node });
                }
                if node == inst.depot() {
                    return Err(PlanError::DepotInRoute { route: ri });
                }
                seen[node] += 1;
                load += inst.demand(node);
            }
            if load > inst.capacity() {
                return Err(PlanError::CapacityViolation {
                    route: ri,
                    load,
                    capacity: inst.capacity(),
                });
            }
        }
        for node in inst.customers() {
            if seen[node] != 1 {
                return Err(PlanError::CoverageViolation(node, seen[node]));
            }
        }
        Ok(())
    }

    /// Sum of demands per route, in route order.
    pub fn loads(&self, inst: &Instance) -> Vec<f64> {
        self.routes
            .iter()
            .map(|r| r.iter().map(|&n| inst.demand(n)).sum())
            .collect()
    }
}

/// Distance convention for edge costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// Full floating-point Euclidean distances.
    #[default]
    Exact,
    /// Distances rounded to the nearest integer (TSPLIB EUC_2D convention).
    Rounded,
}

/// Instance plus a precomputed distance matrix. All search components take
/// an `Evaluator` so the metric is fixed once per run.
pub struct Evaluator<'a> {
    instance: &'a Instance,
    mode: DistanceMode,
    dist: Vec<f64>,
    n: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        Self::with_mode(instance, DistanceMode::Exact)
    }

    pub fn with_mode(instance: &'a Instance, mode: DistanceMode) -> Self {
        let n = instance.n_nodes();
        let mut dist = vec![0.0; n * n];
        for a in 0..n {
            let (xa, ya) = instance.coord(a);
            for b in (a + 1)..n {
                let (xb, yb) = instance.coord(b);
                let mut d = (xa - xb).hypot(ya - yb);
                if mode == DistanceMode::Rounded {
                    d = (d + 0.5).floor();
                }
                dist[a * n + b] = d;
                dist[b * n + a] = d;
            }
        }
        Evaluator {
            instance,
            mode,
            dist,
            n,
        }
    }

    pub fn instance(&self) -> &Instance {
        self.instance
    }

    pub fn mode(&self) -> DistanceMode {
        self.mode
    }

    #[inline]
    pub fn dist(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.n + b]
    }

    pub fn route_distance(&self, route: &[usize]) -> f64 {
        let depot = self.instance.depot();
        if route.is_empty() {
            return 0.0;
        }
        let mut total = self.dist(depot, route[0]);
        for pair in route.windows(2) {
            total += self.dist(pair[0], pair[1]);
        }
        total + self.dist(route[route.len() - 1], depot)
    }

    pub fn plan_distance(&self, plan: &RoutePlan) -> f64 {
        plan.routes().iter().map(|r| self.route_distance(r)).sum()
    }
}

/// Total travel distance of a feasible plan. Validates the plan first and
/// reports contract violations instead of a numeric result.
pub fn evaluate(inst: &Instance, plan: &RoutePlan) -> Result<f64, PlanError> {
    plan.validate(inst)?;
    Ok(Evaluator::new(inst).plan_distance(plan))
}

/// Randomized first-fit construction: customers are shuffled by seed and
/// each is placed in the first route with residual capacity, opening a new
/// route past `n_routes` when none fits. Deterministic per seed.
pub fn initial_solution(inst: &Instance, n_routes: usize, seed: u64) -> RoutePlan {
    let n_routes = n_routes.max(1);
    let mut order: Vec<usize> = inst.customers().collect();
    let mut rng = substream(seed, "init");
    order.shuffle(&mut rng);

    let mut routes: Vec<Vec<usize>> = vec![Vec::new(); n_routes];
    let mut residual: Vec<f64> = vec![inst.capacity(); n_routes];
    for node in order {
        let demand = inst.demand(node);
        match residual.iter().position(|&r| r >= demand) {
            Some(ri) => {
                routes[ri].push(node);
                residual[ri] -= demand;
            }
            None => {
                routes.push(vec![node]);
                residual.push(inst.capacity() - demand);
            }
        }
    }
    RoutePlan::new(routes)
}
