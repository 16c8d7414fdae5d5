//! Best-first branch and bound.
//!
//! Nodes are ordered by their parent's relaxation bound, ties broken by
//! creation order. The branching column is the most fractional integer column
//! (lowest index on ties) and the down child is created first. Each child
//! starts its simplex from the parent's optimal basis.

use alloc::collections::BinaryHeap;
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::cmp::Ordering;

use libm::{ceil, floor};

use super::model::StandardFormMP;
use super::simplex::{self, Compiled, LpStatus, WarmBasis};
use super::{Clock, SolveStatus, Solution, SolverError, SolverSettings};

struct Node {
    bound: f64,
    id: u64,
    /// Tightened bounds `(column, lower, upper)` along the path from the root.
    changes: Vec<(usize, f64, f64)>,
    basis: Option<Rc<WarmBasis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Reversed so the max-heap pops the smallest bound, then the oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.id.cmp(&self.id))
    }
}

struct Incumbent {
    x: Vec<f64>,
    obj: f64,
}

/// Processed nodes between dives below the root.
const DIVE_PERIOD: u64 = 50;

fn rel_gap(incumbent: f64, bound: f64) -> f64 {
    (incumbent - bound) / incumbent.abs().max(1.0)
}

/// Most fractional integer column, lowest index on ties.
fn branching_column(x: &[f64], integer: &[bool], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, (&v, &int)) in x.iter().zip(integer).enumerate() {
        if !int {
            continue;
        }
        let f = v - floor(v);
        let score = f.min(1.0 - f);
        if score > tol && best.map_or(true, |(_, s)| score > s) {
            best = Some((j, score));
        }
    }
    best.map(|(j, _)| j)
}

#[derive(Clone, Copy)]
enum DiveRule {
    /// Round the column closest to an integer to that integer.
    Nearest,
    /// Round up the column with the largest fractional part.
    Up,
}

/// Fractional column with the largest fractional part; lowest index on ties.
fn largest_fraction(x: &[f64], integer: &[bool], tol: f64) -> usize {
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for (j, &v) in x.iter().enumerate() {
        let f = v - floor(v);
        if integer[j] && f > tol && f < 1.0 - tol && f > best.0 {
            best = (f, j);
        }
    }
    best.1
}

/// Fractional column closest to an integer; lowest index on ties.
fn nearest_integral(x: &[f64], integer: &[bool], tol: f64) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    for (j, &v) in x.iter().enumerate() {
        if !integer[j] {
            continue;
        }
        let f = v - floor(v);
        let dist = f.min(1.0 - f);
        if dist > tol && dist < best.0 {
            best = (dist, j);
        }
    }
    best.1
}

struct Search<'a> {
    mp: &'a StandardFormMP,
    lp: Compiled,
    settings: &'a SolverSettings,
    clock: &'a dyn Clock,
    deadline: Option<f64>,
    iterations: u64,
    incumbent: Option<Incumbent>,
    /// Smallest bound among nodes discarded by the gap test.
    pruned_bound: f64,
}

impl Search<'_> {
    fn relax(&mut self, lower: &[f64], upper: &[f64], warm: Option<&WarmBasis>) -> Result<simplex::LpResult, SolverError> {
        let res = simplex::solve(&self.lp, lower, upper, warm, self.settings, self.clock, self.deadline)?;
        self.iterations += res.iterations;
        Ok(res)
    }

    fn offer(&mut self, x: &[f64], obj: f64) {
        if self.incumbent.as_ref().map_or(true, |inc| obj < inc.obj) {
            self.incumbent = Some(Incumbent { x: x.to_vec(), obj });
        }
    }

    fn prunable(&mut self, bound: f64) -> bool {
        let prune = self.incumbent.as_ref().map_or(false, |inc| rel_gap(inc.obj, bound) <= self.settings.mip_gap);
        if prune {
            self.pruned_bound = self.pruned_bound.min(bound);
        }
        prune
    }

    fn timed_out(&self) -> bool {
        self.deadline.map_or(false, |t| self.clock.seconds() >= t)
    }

    /// Starting from a node's relaxation, repeatedly fixes one fractional column and re-solves until the
    /// relaxation is integral, infeasible, or no better than the incumbent.
    fn dive(&mut self, root: &simplex::LpResult, lower: &[f64], upper: &[f64], rule: DiveRule) -> Result<(), SolverError> {
        let mp = self.mp;
        let integer = &mp.integer;
        let mut lower = lower.to_vec();
        let mut upper = upper.to_vec();
        let mut x = root.x.clone();
        let mut obj = root.objective;
        let mut basis = root.basis.clone();
        let n_int = integer.iter().filter(|i| **i).count();
        for _ in 0..=n_int {
            if self.prunable(obj) || self.timed_out() {
                return Ok(());
            }
            if branching_column(&x, integer, self.settings.integrality_tol).is_none() {
                self.offer(&x, obj);
                return Ok(());
            }
            let tol = self.settings.integrality_tol;
            let (j, up_first) = match rule {
                DiveRule::Nearest => {
                    let j = nearest_integral(&x, integer, tol);
                    (j, x[j] - floor(x[j]) > 0.5)
                }
                DiveRule::Up => (largest_fraction(&x, integer, tol), true),
            };
            let mut next = None;
            for up in [up_first, !up_first] {
                let (mut lo, mut hi) = (lower.clone(), upper.clone());
                let v = if up { ceil(x[j]) } else { floor(x[j]) };
                lo[j] = v;
                hi[j] = v;
                let res = self.relax(&lo, &hi, Some(&basis))?;
                if res.status == LpStatus::Optimal {
                    lower = lo;
                    upper = hi;
                    next = Some(res);
                    break;
                }
            }
            let Some(res) = next else { return Ok(()) };
            x = res.x;
            obj = res.objective;
            basis = res.basis;
        }
        Ok(())
    }
}

pub(crate) fn solve(mp: &StandardFormMP, settings: &SolverSettings, clock: &dyn Clock) -> Result<Solution, SolverError> {
    let t0 = clock.seconds();
    let mut lp = Compiled::new(mp);
    for j in 0..mp.n_cols() {
        if mp.integer[j] {
            lp.lower[j] = ceil(lp.lower[j] - settings.integrality_tol);
            lp.upper[j] = floor(lp.upper[j] + settings.integrality_tol);
        }
    }
    let mut s = Search {
        mp,
        lp,
        settings,
        clock,
        deadline: settings.time_limit_s.map(|t| t0 + t),
        iterations: 0,
        incumbent: None,
        pruned_bound: f64::INFINITY,
    };
    let offset = mp.objective_offset;

    let root_infeasible = (0..mp.n_cols()).any(|j| s.lp.lower[j] > s.lp.upper[j]);
    let mut heap = BinaryHeap::new();
    if !root_infeasible {
        heap.push(Node { bound: f64::NEG_INFINITY, id: 0, changes: Vec::new(), basis: None });
    }
    let mut next_id = 1u64;
    let mut nodes = 0u64;
    let mut lower = s.lp.lower.clone();
    let mut upper = s.lp.upper.clone();
    let mut status = SolveStatus::Optimal;

    while let Some(node) = heap.pop() {
        if s.prunable(node.bound) {
            continue;
        }
        if nodes >= settings.node_limit {
            heap.push(node);
            status = SolveStatus::NodeLimit;
            break;
        }
        if s.timed_out() {
            heap.push(node);
            status = SolveStatus::TimeLimit;
            break;
        }
        lower.copy_from_slice(&s.lp.lower);
        upper.copy_from_slice(&s.lp.upper);
        for &(j, l, u) in &node.changes {
            lower[j] = l;
            upper[j] = u;
        }
        let res = s.relax(&lower, &upper, node.basis.as_deref())?;
        nodes += 1;
        match res.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                status = SolveStatus::Unbounded;
                heap.clear();
                break;
            }
            LpStatus::TimeLimit => {
                heap.push(node);
                status = SolveStatus::TimeLimit;
                break;
            }
        }
        let is_root = node.id == 0;
        if s.prunable(res.objective) {
            continue;
        }
        let Some(j) = branching_column(&res.x, &mp.integer, settings.integrality_tol) else {
            s.offer(&res.x, res.objective);
            continue;
        };
        if settings.dive_heuristic {
            if is_root {
                s.dive(&res, &lower, &upper, DiveRule::Nearest)?;
                s.dive(&res, &lower, &upper, DiveRule::Up)?;
            } else if nodes % DIVE_PERIOD == 0 {
                s.dive(&res, &lower, &upper, DiveRule::Nearest)?;
            }
        }
        let v = res.x[j];
        let mut down = node.changes.clone();
        down.push((j, lower[j], floor(v)));
        let mut up = node.changes;
        up.push((j, ceil(v), upper[j]));
        for changes in [down, up] {
            heap.push(Node { bound: res.objective, id: next_id, changes, basis: Some(res.basis.clone()) });
            next_id += 1;
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let wall_time_s = (clock.seconds() - t0).max(0.0);
    let (primal, objective, best_bound) = match (&s.incumbent, status) {
        (_, SolveStatus::Unbounded) => (Vec::new(), None, None),
        (Some(inc), _) => {
            let bound = inc.obj.min(open_bound).min(s.pruned_bound);
            (inc.x.clone(), Some(mp.objective_value(&inc.x)), Some(bound + offset))
        }
        (None, _) => (Vec::new(), None, open_bound.is_finite().then(|| open_bound + offset)),
    };
    let status = match status {
        SolveStatus::Optimal if s.incumbent.is_none() => SolveStatus::Infeasible,
        other => other,
    };
    Ok(Solution {
        status,
        primal,
        objective,
        duals: Vec::new(),
        best_bound,
        iterations: s.iterations,
        nodes,
        wall_time_s,
    })
}
