//! Neighborhood enumeration with capacity filtering.

use super::{Move, OperatorId, OperatorKind};
use crate::instance::Instance;
use crate::rng::substream;
use crate::solution::RoutePlan;
use rand::seq::SliceRandom;
use std::ops::ControlFlow;

/// Per-plan data shared by all enumerations: route loads and per-route
/// demand prefix sums for O(1) segment loads.
struct PlanCtx {
    loads: Vec<f64>,
    prefix: Vec<Vec<f64>>,
    capacity: f64,
}

impl PlanCtx {
    fn new(inst: &Instance, plan: &RoutePlan) -> Self {
        let prefix: Vec<Vec<f64>> = plan
            .routes()
            .iter()
            .map(|route| {
                let mut acc = Vec::with_capacity(route.len() + 1);
                acc.push(0.0);
                let mut sum = 0.0;
                for &node in route {
                    sum += inst.demand(node);
                    acc.push(sum);
                }
                acc
            })
            .collect();
        let loads = prefix.iter().map(|p| *p.last().unwrap()).collect();
        PlanCtx {
            loads,
            prefix,
            capacity: inst.capacity(),
        }
    }

    #[inline]
    fn seg_load(&self, route: usize, start: usize, len: usize) -> f64 {
        self.prefix[route][start + len] - self.prefix[route][start]
    }
}

/// Walk every capacity-feasible move of `op` on `plan` in canonical order,
/// calling `f` for each. `f` may break to stop early.
pub(crate) fn visit_moves<F>(
    inst: &Instance,
    plan: &RoutePlan,
    op: OperatorId,
    f: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(Move) -> ControlFlow<()>,
{
    let ctx = PlanCtx::new(inst, plan);
    let routes = plan.routes();
    match op.kind() {
        OperatorKind::TwoOpt => visit_two_opt(routes, op, f),
        OperatorKind::IntraSwap => visit_intra_swap(routes, op, f),
        OperatorKind::IntraRelocate => visit_intra_relocate(routes, op, f),
        OperatorKind::CrossReverse => visit_cross(routes, &ctx, op, f),
        OperatorKind::InterSwap { len } => visit_inter_swap(routes, &ctx, op, len, len, f),
        OperatorKind::AsymSwap {
            len_first,
            len_second,
        } => visit_inter_swap(routes, &ctx, op, len_first, len_second, f),
        OperatorKind::InterRelocate { len } => visit_inter_relocate(routes, &ctx, op, len, f),
        OperatorKind::CyclicExchange => visit_cyclic(routes, inst, &ctx, op, f),
    }
}

fn visit_two_opt<F>(routes: &[Vec<usize>], op: OperatorId, f: &mut F) -> ControlFlow<()>
where
    F: FnMut(Move) -> ControlFlow<()>,
{
    for (r, route) in routes.iter().enumerate() {
        for start in 0..route.len() {
            for len in 2..=(route.len() - start) {
                let mut mv = Move::new(op);
                mv.routes[0] = r as u16;
                mv.starts[0] = start as u16;
                mv.lens[0] = len as u16;
                f(mv)?;
            }
        }
    }
    ControlFlow::Continue(())
}

fn visit_intra_swap<F>(routes: &[Vec<usize>], op: OperatorId, f: &mut F) -> ControlFlow<()>
where
    F: FnMut(Move) -> ControlFlow<()>,
{
    for (r, route) in routes.iter().enumerate() {
        for i in 0..route.len().saturating_sub(1) {
            for j in (i + 1)..route.len() {
                let mut mv = Move::new(op);
                mv.routes[0] = r as u16;
                mv.starts[0] = i as u16;
                mv.starts[1] = j as u16;
                mv.lens = [1, 1, 0];
                f(mv)?;
            }
        }
    }
    ControlFlow::Continue(())
}

fn visit_intra_relocate<F>(routes: &[Vec<usize>], op: OperatorId, f: &mut F) -> ControlFlow<()>
where
    F: FnMut(Move) -> ControlFlow<()>,
{
    for (r, route) in routes.iter().enumerate() {
        // j indexes an insertion slot of the route with position i removed;
        // slot i would rebuild the original order.
        for i in 0..route.len() {
            for j in 0..route.len() {
                if j == i {
                    continue;
                }
                let mut mv = Move::new(op);
                mv.routes[0] = r as u16;
                mv.starts[0] = i as u16;
                mv.starts[1] = j as u16;
                mv.lens[0] = 1;
                f(mv)?;
            }
        }
    }
    ControlFlow::Continue(())
}

fn visit_cross<F>(
    routes: &[Vec<usize>],
    ctx: &PlanCtx,
    op: OperatorId,
    f: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(Move) -> ControlFlow<()>,
{
    for r1 in 0..routes.len() {
        for r2 in (r1 + 1)..routes.len() {
            let (len1, len2) = (routes[r1].len(), routes[r2].len());
            for c1 in 0..=len1 {
                for c2 in 0..=len2 {
                    if c1 == len1 && c2 == len2 {
                        continue; // nothing moves
                    }
                    let tail1 = ctx.seg_load(r1, c1, len1 - c1);
                    let tail2 = ctx.seg_load(r2, c2, len2 - c2);
                    let load1 = ctx.loads[r1] - tail1 + tail2;
                    let load2 = ctx.loads[r2] - tail2 + tail1;
                    if load1 > ctx.capacity || load2 > ctx.capacity {
                        continue;
                    }
                    let mut mv = Move::new(op);
                    mv.routes[0] = r1 as u16;
                    mv.routes[1] = r2 as u16;
                    mv.starts[0] = c1 as u16;
                    mv.starts[1] = c2 as u16;
                    mv.lens[0] = (len1 - c1) as u16;
                    mv.lens[1] = (len2 - c2) as u16;
                    f(mv)?;
                    if (len1 - c1).max(len2 - c2) >= 2 {
                        let mut rev = mv;
                        rev.reversed = true;
                        f(rev)?;
                    }
                }
            }
        }
    }
    ControlFlow::Continue(())
}

fn visit_inter_swap<F>(
    routes: &[Vec<usize>],
    ctx: &PlanCtx,
    op: OperatorId,
    len_first: usize,
    len_second: usize,
    f: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(Move) -> ControlFlow<()>,
{
    for r1 in 0..routes.len() {
        for r2 in (r1 + 1)..routes.len() {
            if routes[r1].len() < len_first || routes[r2].len() < len_second {
                continue;
            }
            for i in 0..=(routes[r1].len() - len_first) {
                let seg1 = ctx.seg_load(r1, i, len_first);
                for j in 0..=(routes[r2].len() - len_second) {
                    let seg2 = ctx.seg_load(r2, j, len_second);
                    if ctx.loads[r1] - seg1 + seg2 > ctx.capacity
                        || ctx.loads[r2] - seg2 + seg1 > ctx.capacity
                    {
                        continue;
                    }
                    let mut mv = Move::new(op);
                    mv.routes[0] = r1 as u16;
                    mv.routes[1] = r2 as u16;
                    mv.starts[0] = i as u16;
                    mv.starts[1] = j as u16;
                    mv.lens[0] = len_first as u16;
                    mv.lens[1] = len_second as u16;
                    f(mv)?;
                }
            }
        }
    }
    ControlFlow::Continue(())
}

fn visit_inter_relocate<F>(
    routes: &[Vec<usize>],
    ctx: &PlanCtx,
    op: OperatorId,
    len: usize,
    f: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(Move) -> ControlFlow<()>,
{
    for src in 0..routes.len() {
        if routes[src].len() < len {
            continue;
        }
        for dst in 0..routes.len() {
            if dst == src {
                continue;
            }
            for i in 0..=(routes[src].len() - len) {
                let seg = ctx.seg_load(src, i, len);
                if ctx.loads[dst] + seg > ctx.capacity {
                    continue;
                }
                for j in 0..=routes[dst].len() {
                    let mut mv = Move::new(op);
                    mv.routes[0] = src as u16;
                    mv.routes[1] = dst as u16;
                    mv.starts[0] = i as u16;
                    mv.starts[1] = j as u16;
                    mv.lens[0] = len as u16;
                    f(mv)?;
                }
            }
        }
    }
    ControlFlow::Continue(())
}

fn visit_cyclic<F>(
    routes: &[Vec<usize>],
    inst: &Instance,
    ctx: &PlanCtx,
    op: OperatorId,
    f: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(Move) -> ControlFlow<()>,
{
    // Each rotation class once: lowest route index first, the remaining two
    // in both orders (the two directions are distinct moves).
    let n = routes.len();
    for ra in 0..n {
        for rb in (ra + 1)..n {
            for rc in (ra + 1)..n {
                if rc == rb {
                    continue;
                }
                for i in 0..routes[ra].len() {
                    let da = inst.demand(routes[ra][i]);
                    for j in 0..routes[rb].len() {
                        let db = inst.demand(routes[rb][j]);
                        if ctx.loads[rb] - db + da > ctx.capacity {
                            continue;
                        }
                        for (k, &node_c) in routes[rc].iter().enumerate() {
                            let dc = inst.demand(node_c);
                            if ctx.loads[ra] - da + dc > ctx.capacity
                                || ctx.loads[rc] - dc + db > ctx.capacity
                            {
                                continue;
                            }
                            let mut mv = Move::new(op);
                            mv.routes = [ra as u16, rb as u16, rc as u16];
                            mv.starts = [i as u16, j as u16, k as u16];
                            mv.lens = [1, 1, 1];
                            f(mv)?;
                        }
                    }
                }
            }
        }
    }
    ControlFlow::Continue(())
}

/// Every capacity-feasible move of `op` on `plan`, each exactly once, in a
/// uniformly random order determined by `order_seed`.
pub fn enumerate_moves(
    inst: &Instance,
    plan: &RoutePlan,
    op: OperatorId,
    order_seed: u64,
) -> Vec<Move> {
    let mut moves = Vec::new();
    let _ = visit_moves(inst, plan, op, &mut |mv| {
        moves.push(mv);
        ControlFlow::<()>::Continue(())
    });
    let mut rng = substream(order_seed, "move-order");
    moves.shuffle(&mut rng);
    moves
}
