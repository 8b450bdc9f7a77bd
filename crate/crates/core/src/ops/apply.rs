//! Move application and incremental cost evaluation.

use super::{Move, OperatorKind};
use crate::error::PlanError;
use crate::solution::{Evaluator, RoutePlan};

/// Apply a move produced by `enumerate_moves` on the same plan. The input
/// plan is untouched; the result is a new feasible plan. Moves carried over
/// from a different plan shape are rejected as stale.
pub fn apply_move(plan: &RoutePlan, mv: &Move) -> Result<RoutePlan, PlanError> {
    check_bounds(plan, mv)?;
    Ok(apply_unchecked(plan, mv))
}

fn check_bounds(plan: &RoutePlan, mv: &Move) -> Result<(), PlanError> {
    let stale = |m: String| Err(PlanError::StaleMove(m));
    let routes = plan.routes();
    for (slot, &r) in mv.routes().iter().enumerate() {
        if r as usize >= routes.len() {
            return stale(format!("route {r} out of range"));
        }
        if mv.routes()[..slot].contains(&r) {
            return stale(format!("route {r} referenced twice"));
        }
    }
    let route_len = |slot: usize| routes[mv.routes[slot] as usize].len();
    let (s, l) = (&mv.starts, &mv.lens);
    let ok = match mv.op.kind() {
        OperatorKind::TwoOpt => (s[0] + l[0]) as usize <= route_len(0) && l[0] >= 2,
        OperatorKind::IntraSwap => s[0] < s[1] && (s[1] as usize) < route_len(0),
        OperatorKind::IntraRelocate => {
            (s[0] as usize) < route_len(0) && (s[1] as usize) < route_len(0) && s[0] != s[1]
        }
        OperatorKind::CrossReverse => {
            s[0] as usize <= route_len(0) && s[1] as usize <= route_len(1)
        }
        OperatorKind::InterSwap { .. } | OperatorKind::AsymSwap { .. } => {
            (s[0] + l[0]) as usize <= route_len(0) && (s[1] + l[1]) as usize <= route_len(1)
        }
        OperatorKind::InterRelocate { .. } => {
            (s[0] + l[0]) as usize <= route_len(0) && s[1] as usize <= route_len(1)
        }
        OperatorKind::CyclicExchange => {
            (s[0] as usize) < route_len(0)
                && (s[1] as usize) < route_len(1)
                && (s[2] as usize) < route_len(2)
        }
    };
    if ok {
        Ok(())
    } else {
        stale(format!("{mv:?} does not fit the plan shape"))
    }
}

/// Rearrange without bounds checks; callers guarantee the move was
/// enumerated on this exact plan.
pub(crate) fn apply_unchecked(plan: &RoutePlan, mv: &Move) -> RoutePlan {
    let mut routes = plan.routes().to_vec();
    let (s, l) = (&mv.starts, &mv.lens);
    match mv.op.kind() {
        OperatorKind::TwoOpt => {
            let r = &mut routes[mv.routes[0] as usize];
            r[s[0] as usize..(s[0] + l[0]) as usize].reverse();
        }
        OperatorKind::IntraSwap => {
            let r = &mut routes[mv.routes[0] as usize];
            r.swap(s[0] as usize, s[1] as usize);
        }
        OperatorKind::IntraRelocate => {
            let r = &mut routes[mv.routes[0] as usize];
            let node = r.remove(s[0] as usize);
            r.insert(s[1] as usize, node);
        }
        OperatorKind::CrossReverse => {
            let (r1, r2) = (mv.routes[0] as usize, mv.routes[1] as usize);
            let mut tail1 = routes[r1].split_off(s[0] as usize);
            let mut tail2 = routes[r2].split_off(s[1] as usize);
            if mv.reversed {
                tail1.reverse();
                tail2.reverse();
            }
            routes[r1].extend(tail2);
            routes[r2].extend(tail1);
        }
        OperatorKind::InterSwap { .. } | OperatorKind::AsymSwap { .. } => {
            let (r1, r2) = (mv.routes[0] as usize, mv.routes[1] as usize);
            let seg1: Vec<usize> = routes[r1]
                .splice(s[0] as usize..(s[0] + l[0]) as usize, std::iter::empty())
                .collect();
            let seg2: Vec<usize> = routes[r2]
                .splice(s[1] as usize..(s[1] + l[1]) as usize, seg1)
                .collect();
            routes[r1].splice(s[0] as usize..s[0] as usize, seg2);
        }
        OperatorKind::InterRelocate { .. } => {
            let (src, dst) = (mv.routes[0] as usize, mv.routes[1] as usize);
            let seg: Vec<usize> = routes[src]
                .drain(s[0] as usize..(s[0] + l[0]) as usize)
                .collect();
            routes[dst].splice(s[1] as usize..s[1] as usize, seg);
        }
        OperatorKind::CyclicExchange => {
            let (ra, rb, rc) = (
                mv.routes[0] as usize,
                mv.routes[1] as usize,
                mv.routes[2] as usize,
            );
            let (i, j, k) = (s[0] as usize, s[1] as usize, s[2] as usize);
            let x = routes[ra][i];
            let y = routes[rb][j];
            let z = routes[rc][k];
            routes[ra][i] = z;
            routes[rb][j] = x;
            routes[rc][k] = y;
        }
    }
    RoutePlan::new(routes)
}

/// distance(apply_move(plan, mv)) - distance(plan), from the affected legs
/// only. Callers guarantee the move fits the plan.
pub fn move_delta(eval: &Evaluator, plan: &RoutePlan, mv: &Move) -> f64 {
    let depot = eval.instance().depot();
    let routes = plan.routes();
    // node at position i of the route, or the depot off either end
    let at = |route: &[usize], i: isize| -> usize {
        if i < 0 || i as usize >= route.len() {
            depot
        } else {
            route[i as usize]
        }
    };
    let (s, l) = (&mv.starts, &mv.lens);
    match mv.op.kind() {
        OperatorKind::TwoOpt => {
            let route = &routes[mv.routes[0] as usize];
            let (i, len) = (s[0] as isize, l[0] as isize);
            let a = at(route, i - 1);
            let b = at(route, i);
            let c = at(route, i + len - 1);
            let e = at(route, i + len);
            eval.dist(a, c) + eval.dist(b, e) - eval.dist(a, b) - eval.dist(c, e)
        }
        OperatorKind::IntraSwap => {
            let route = &routes[mv.routes[0] as usize];
            let (i, j) = (s[0] as isize, s[1] as isize);
            let (u, v) = (at(route, i), at(route, j));
            if j == i + 1 {
                let a = at(route, i - 1);
                let e = at(route, j + 1);
                eval.dist(a, v) + eval.dist(u, e) - eval.dist(a, u) - eval.dist(v, e)
            } else {
                let a = at(route, i - 1);
                let b = at(route, i + 1);
                let c = at(route, j - 1);
                let e = at(route, j + 1);
                eval.dist(a, v) + eval.dist(v, b) + eval.dist(c, u) + eval.dist(u, e)
                    - eval.dist(a, u)
                    - eval.dist(u, b)
                    - eval.dist(c, v)
                    - eval.dist(v, e)
            }
        }
        OperatorKind::IntraRelocate => {
            let route = &routes[mv.routes[0] as usize];
            let (i, j) = (s[0] as usize, s[1] as usize);
            let u = route[i];
            let a = at(route, i as isize - 1);
            let b = at(route, i as isize + 1);
            // slot j of the route with position i removed; map back to
            // original positions
            let p = if j == 0 {
                depot
            } else {
                let m = j - 1;
                route[if m < i { m } else { m + 1 }]
            };
            let q = if j >= route.len() - 1 {
                depot
            } else {
                route[if j < i { j } else { j + 1 }]
            };
            eval.dist(a, b) - eval.dist(a, u) - eval.dist(u, b) + eval.dist(p, u) + eval.dist(u, q)
                - eval.dist(p, q)
        }
        OperatorKind::CrossReverse => {
            let r1 = &routes[mv.routes[0] as usize];
            let r2 = &routes[mv.routes[1] as usize];
            let (c1, c2) = (s[0] as usize, s[1] as usize);
            let a1 = at(r1, c1 as isize - 1);
            let a2 = at(r2, c2 as isize - 1);
            let h1 = at(r1, c1 as isize);
            let h2 = at(r2, c2 as isize);
            let last1 = if c1 < r1.len() {
                r1[r1.len() - 1]
            } else {
                depot
            };
            let last2 = if c2 < r2.len() {
                r2[r2.len() - 1]
            } else {
                depot
            };
            if !mv.reversed {
                eval.dist(a1, h2) + eval.dist(a2, h1) - eval.dist(a1, h1) - eval.dist(a2, h2)
            } else {
                eval.dist(a1, last2)
                    + eval.dist(h2, depot)
                    + eval.dist(a2, last1)
                    + eval.dist(h1, depot)
                    - eval.dist(a1, h1)
                    - eval.dist(last1, depot)
                    - eval.dist(a2, h2)
                    - eval.dist(last2, depot)
            }
        }
        OperatorKind::InterSwap { .. } | OperatorKind::AsymSwap { .. } => {
            let r1 = &routes[mv.routes[0] as usize];
            let r2 = &routes[mv.routes[1] as usize];
            let (i, la) = (s[0] as usize, l[0] as usize);
            let (j, lb) = (s[1] as usize, l[1] as usize);
            let (s1h, s1t) = (r1[i], r1[i + la - 1]);
            let (s2h, s2t) = (r2[j], r2[j + lb - 1]);
            let a = at(r1, i as isize - 1);
            let b = at(r1, (i + la) as isize);
            let c = at(r2, j as isize - 1);
            let e = at(r2, (j + lb) as isize);
            eval.dist(a, s2h) + eval.dist(s2t, b) - eval.dist(a, s1h) - eval.dist(s1t, b)
                + eval.dist(c, s1h)
                + eval.dist(s1t, e)
                - eval.dist(c, s2h)
                - eval.dist(s2t, e)
        }
        OperatorKind::InterRelocate { .. } => {
            let src = &routes[mv.routes[0] as usize];
            let dst = &routes[mv.routes[1] as usize];
            let (i, len) = (s[0] as usize, l[0] as usize);
            let j = s[1] as usize;
            let (sh, st) = (src[i], src[i + len - 1]);
            let a = at(src, i as isize - 1);
            let b = at(src, (i + len) as isize);
            let p = at(dst, j as isize - 1);
            let q = at(dst, j as isize);
            eval.dist(a, b) - eval.dist(a, sh) - eval.dist(st, b)
                + eval.dist(p, sh)
                + eval.dist(st, q)
                - eval.dist(p, q)
        }
        OperatorKind::CyclicExchange => {
            let ra = &routes[mv.routes[0] as usize];
            let rb = &routes[mv.routes[1] as usize];
            let rc = &routes[mv.routes[2] as usize];
            let (i, j, k) = (s[0] as isize, s[1] as isize, s[2] as isize);
            let (x, y, z) = (at(ra, i), at(rb, j), at(rc, k));
            let swap_cost = |route: &[usize], pos: isize, old: usize, new: usize| {
                let p = at(route, pos - 1);
                let q = at(route, pos + 1);
                eval.dist(p, new) + eval.dist(new, q) - eval.dist(p, old) - eval.dist(old, q)
            };
            swap_cost(ra, i, x, z) + swap_cost(rb, j, y, x) + swap_cost(rc, k, z, y)
        }
    }
}
