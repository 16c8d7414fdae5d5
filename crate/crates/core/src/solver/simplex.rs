//! Bounded two-phase revised primal simplex.
//!
//! Every row `i` gets a logical variable `r_i` with column `-e_i`, so the
//! working system is `A x - r = 0` with bounds on both `x` and `r`. The
//! all-logical basis is always a valid start. Phase 1 minimizes the sum of
//! bound violations of basic variables; phase 2 minimizes the true cost.
//! Pricing is Dantzig's rule. A first run of pivots without objective
//! progress widens every bound by a small, variable-specific amount; the
//! original bounds come back once that problem is optimal and a few more
//! pivots clean up. A second run switches to Bland's rule. The ratio test is
//! Harris' two-pass test, or the textbook test with smallest-index ties while
//! Bland's rule is active.
//!
//! When the starting basis is dual feasible (a parent's basis after bound
//! changes, or the all-logical basis of a model with nonnegative costs) a
//! dual simplex phase runs first, until the basis is primal feasible or the
//! problem is proven infeasible; the primal loop then only cleans up.

use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;

use super::lu::{ColumnRef, LuFactor};
use super::model::{RowSense, StandardFormMP};
use super::{Clock, PivotRule, SolverError, SolverSettings};

/// Smallest acceptable pivot element in the ratio test.
const PIVOT_TOL: f64 = 1e-9;
/// Basis repairs tolerated in one solve before giving up.
const MAX_REPAIRS: u32 = 20;
/// Relative bound widening applied when the primal loop stalls.
const PERTURBATION: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

/// A basis that can seed a later solve of the same problem with different
/// bounds.
#[derive(Clone, Debug)]
pub(crate) struct WarmBasis {
    head: Vec<usize>,
    state: Vec<VarState>,
    /// Dual steepest-edge weights by basis position.
    weights: Vec<f64>,
}

/// Column-compressed constraint matrix plus costs and bounds.
pub(crate) struct Compiled {
    pub m: usize,
    pub n: usize,
    col_start: Vec<usize>,
    row_idx: Vec<usize>,
    val: Vec<f64>,
    logical_idx: Vec<usize>,
    logical_val: Vec<f64>,
    /// Row-major copy of the structural part, for pivot rows.
    row_start: Vec<usize>,
    row_col: Vec<usize>,
    row_val: Vec<f64>,
    pub cost: Vec<f64>,
    /// Bounds of the `n + m` variables (structural, then logical).
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Compiled {
    pub(crate) fn new(mp: &StandardFormMP) -> Compiled {
        let (m, n) = (mp.n_rows(), mp.n_cols());
        let mut trip: Vec<(usize, usize, f64)> = mp.triplets.iter().map(|&(r, c, v)| (c, r, v)).collect();
        trip.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut col_start = vec![0usize; n + 1];
        let mut row_idx = Vec::with_capacity(trip.len());
        let mut val: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (c, r, v) in trip {
            if last == Some((c, r)) {
                *val.last_mut().unwrap() += v;
                continue;
            }
            last = Some((c, r));
            row_idx.push(r);
            val.push(v);
            col_start[c + 1] = row_idx.len();
        }
        for c in 0..n {
            if col_start[c + 1] < col_start[c] {
                col_start[c + 1] = col_start[c];
            }
        }
        let mut row_start = vec![0usize; m + 1];
        for &r in &row_idx {
            row_start[r + 1] += 1;
        }
        for i in 0..m {
            row_start[i + 1] += row_start[i];
        }
        let mut fill = row_start.clone();
        let mut row_col = vec![0usize; row_idx.len()];
        let mut row_val = vec![0.0; row_idx.len()];
        for c in 0..n {
            for k in col_start[c]..col_start[c + 1] {
                let r = row_idx[k];
                row_col[fill[r]] = c;
                row_val[fill[r]] = val[k];
                fill[r] += 1;
            }
        }
        let mut lower = mp.col_lower.clone();
        let mut upper = mp.col_upper.clone();
        for i in 0..m {
            let b = mp.rhs[i];
            let (l, u) = match mp.row_sense[i] {
                RowSense::Le => (f64::NEG_INFINITY, b),
                RowSense::Ge => (b, f64::INFINITY),
                RowSense::Eq => (b, b),
            };
            lower.push(l);
            upper.push(u);
        }
        Compiled {
            m,
            n,
            col_start,
            row_idx,
            val,
            logical_idx: (0..m).collect(),
            logical_val: vec![-1.0; m],
            row_start,
            row_col,
            row_val,
            cost: mp.objective.clone(),
            lower,
            upper,
        }
    }

    fn column(&self, j: usize) -> ColumnRef<'_> {
        if j < self.n {
            let (s, e) = (self.col_start[j], self.col_start[j + 1]);
            ColumnRef { idx: &self.row_idx[s..e], val: &self.val[s..e] }
        } else {
            let i = j - self.n;
            ColumnRef { idx: &self.logical_idx[i..i + 1], val: &self.logical_val[i..i + 1] }
        }
    }

    fn dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            (self.col_start[j]..self.col_start[j + 1]).map(|k| self.val[k] * y[self.row_idx[k]]).sum()
        } else {
            -y[j - self.n]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
}

pub(crate) struct LpResult {
    pub status: LpStatus,
    /// Values of the structural variables.
    pub x: Vec<f64>,
    /// Row duals: sensitivity of the optimum to each right-hand side.
    pub y: Vec<f64>,
    /// Objective without the model's constant offset.
    pub objective: f64,
    pub iterations: u64,
    pub basis: Rc<WarmBasis>,
}

struct Engine<'a> {
    lp: &'a Compiled,
    /// Working bounds; differ from the node's while perturbed.
    lower: Vec<f64>,
    upper: Vec<f64>,
    settings: &'a SolverSettings,
    head: Vec<usize>,
    state: Vec<VarState>,
    /// Dual steepest-edge weights `|e_p' B^-1|^2`, exact or estimated.
    weights: Vec<f64>,
    x: Vec<f64>,
    lu: LuFactor,
    work: Vec<f64>,
    repairs: u32,
}

fn nonbasic_state(l: f64, u: f64) -> VarState {
    if l.is_finite() {
        VarState::AtLower
    } else if u.is_finite() {
        VarState::AtUpper
    } else {
        VarState::Free
    }
}

impl<'a> Engine<'a> {
    fn nonbasic_value(&self, j: usize) -> f64 {
        let (l, u) = (self.lower[j], self.upper[j]);
        match self.state[j] {
            VarState::AtLower if l.is_finite() => l,
            VarState::AtUpper if u.is_finite() => u,
            _ => {
                if l.is_finite() {
                    l
                } else if u.is_finite() {
                    u
                } else {
                    0.0
                }
            }
        }
    }

    /// Widens every finite bound of every non-fixed variable by a small,
    /// variable-specific amount so that degenerate vertices become
    /// nondegenerate.
    fn perturb_bounds(&mut self) {
        for j in 0..self.lower.len() {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l == u {
                continue;
            }
            let h = (j as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 11;
            let scale = PERTURBATION * (1.0 + h as f64 / (1u64 << 53) as f64);
            if l.is_finite() {
                self.lower[j] = l - scale * (1.0 + l.abs());
            }
            if u.is_finite() {
                self.upper[j] = u + scale * (1.0 + u.abs());
            }
        }
        self.normalize_nonbasic();
        self.compute_basics();
    }

    fn restore_bounds(&mut self, lower: &[f64], upper: &[f64]) {
        self.lower.copy_from_slice(lower);
        self.upper.copy_from_slice(upper);
        self.normalize_nonbasic();
        self.compute_basics();
    }

    /// Nonbasic states consistent with the current bounds.
    fn normalize_nonbasic(&mut self) {
        for j in 0..self.state.len() {
            if self.state[j] == VarState::Basic {
                continue;
            }
            let (l, u) = (self.lower[j], self.upper[j]);
            self.state[j] = match self.state[j] {
                VarState::AtUpper if u.is_finite() && l != u => VarState::AtUpper,
                VarState::AtLower if l.is_finite() => VarState::AtLower,
                _ => nonbasic_state(l, u),
            };
            self.x[j] = self.nonbasic_value(j);
        }
    }

    fn refactor(&mut self) -> Result<(), SolverError> {
        loop {
            let lp = self.lp;
            let head = &self.head;
            match LuFactor::factorize(lp.m, |p| lp.column(head[p])) {
                Ok(lu) => {
                    self.lu = lu;
                    return Ok(());
                }
                Err(singular) => {
                    self.repairs += 1;
                    if self.repairs > MAX_REPAIRS {
                        return Err(SolverError::NumericalBreakdown("basis stays singular after repairs"));
                    }
                    for (pos, row) in singular.replacements {
                        let out = self.head[pos];
                        let logical = lp.n + row;
                        self.state[out] = nonbasic_state(self.lower[out], self.upper[out]);
                        self.x[out] = self.nonbasic_value(out);
                        self.head[pos] = logical;
                        self.weights[pos] = 1.0;
                        self.state[logical] = VarState::Basic;
                    }
                }
            }
        }
    }

    /// Recomputes basic values from the nonbasic ones.
    fn compute_basics(&mut self) {
        let m = self.lp.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.state.len() {
            if self.state[j] == VarState::Basic {
                continue;
            }
            let xj = self.x[j];
            if xj != 0.0 {
                let c = self.lp.column(j);
                for (&r, &v) in c.idx.iter().zip(c.val) {
                    rhs[r] -= v * xj;
                }
            }
        }
        self.lu.ftran(&mut rhs, &mut self.work);
        for p in 0..m {
            self.x[self.head[p]] = rhs[p];
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let tol = self.settings.feasibility_tol;
        let v = self.x[j];
        if v < self.lower[j] - tol {
            self.lower[j] - v
        } else if v > self.upper[j] + tol {
            v - self.upper[j]
        } else {
            0.0
        }
    }

    fn phase1_cost(&self, j: usize) -> f64 {
        let tol = self.settings.feasibility_tol;
        if self.x[j] < self.lower[j] - tol {
            -1.0
        } else if self.x[j] > self.upper[j] + tol {
            1.0
        } else {
            0.0
        }
    }
}

struct Candidate {
    var: usize,
    d: f64,
}

/// Step of the ratio test.
enum Step {
    Flip(f64),
    Pivot { pos: usize, theta: f64, to_upper: bool },
    Unbounded,
}

pub(crate) fn solve(
    lp: &Compiled,
    lower: &[f64],
    upper: &[f64],
    warm: Option<&WarmBasis>,
    settings: &SolverSettings,
    clock: &dyn Clock,
    deadline: Option<f64>,
) -> Result<LpResult, SolverError> {
    let (m, n) = (lp.m, lp.n);
    let nt = n + m;
    let (head, state, weights) = match warm {
        Some(w) if w.head.len() == m && w.state.len() == nt => (w.head.clone(), w.state.clone(), w.weights.clone()),
        _ => {
            let mut state: Vec<VarState> = (0..nt).map(|j| nonbasic_state(lower[j], upper[j])).collect();
            for s in &mut state[n..] {
                *s = VarState::Basic;
            }
            ((n..nt).collect(), state, vec![1.0; m])
        }
    };
    let lu = LuFactor::factorize(0, |_| unreachable!()).map_err(|_| SolverError::NumericalBreakdown("empty factor"))?;
    let mut e = Engine {
        lp,
        lower: lower.to_vec(),
        upper: upper.to_vec(),
        settings,
        head,
        state,
        weights,
        x: vec![0.0; nt],
        lu,
        work: vec![0.0; m],
        repairs: 0,
    };
    e.normalize_nonbasic();
    e.refactor()?;
    e.compute_basics();

    let mut iterations = 0u64;
    match dual_phase(&mut e, clock, deadline, &mut iterations)? {
        DualEnd::Infeasible => return Ok(finish(e, LpStatus::Infeasible, vec![0.0; m], iterations)),
        DualEnd::TimeLimit => return Ok(finish(e, LpStatus::TimeLimit, vec![0.0; m], iterations)),
        DualEnd::Feasible | DualEnd::GiveUp => {}
    }

    let opt_tol = settings.optimality_tol;
    let feas_tol = settings.feasibility_tol;
    let stall_limit = u64::from(settings.bland_stall_factor) * (m + n) as u64;
    let mut bland = settings.pivot_rule == PivotRule::Bland;
    let mut stall = 0u64;
    let mut fresh = e.lu.n_etas() == 0;
    let mut last_phase1 = true;
    // Stalling first perturbs the bounds; Bland's rule is the second resort.
    let mut perturbed = false;
    let mut perturbation_used = false;
    let mut cb = vec![0.0; m];
    let mut y = vec![0.0; m];
    let mut alpha = vec![0.0; m];

    loop {
        if iterations >= settings.max_iterations {
            return Err(SolverError::NumericalBreakdown("iteration limit"));
        }
        if let Some(t) = deadline {
            if iterations % 64 == 0 && clock.seconds() >= t {
                if perturbed {
                    e.restore_bounds(lower, upper);
                }
                return Ok(finish(e, LpStatus::TimeLimit, vec![0.0; m], iterations));
            }
        }
        if e.lu.n_etas() >= settings.refactor_interval as usize {
            e.refactor()?;
            e.compute_basics();
            fresh = true;
        }

        let phase1 = e.head.iter().any(|&j| e.infeasibility(j) > 0.0);
        if phase1 != last_phase1 {
            stall = 0;
            if settings.pivot_rule != PivotRule::Bland {
                bland = false;
            }
            last_phase1 = phase1;
        }
        for p in 0..m {
            let j = e.head[p];
            cb[p] = if phase1 { e.phase1_cost(j) } else { cost_of(lp, j) };
        }
        y.copy_from_slice(&cb);
        e.lu.btran(&mut y, &mut e.work);

        // Pricing.
        let mut best: Option<Candidate> = None;
        for j in 0..nt {
            let st = e.state[j];
            if st == VarState::Basic || e.lower[j] == e.upper[j] {
                continue;
            }
            let c = if phase1 { 0.0 } else { cost_of(lp, j) };
            let d = c - lp.dot(j, &y);
            let eligible = match st {
                VarState::AtLower => d < -opt_tol,
                VarState::AtUpper => d > opt_tol,
                VarState::Free => d.abs() > opt_tol,
                VarState::Basic => false,
            };
            if !eligible {
                continue;
            }
            if bland {
                best = Some(Candidate { var: j, d });
                break;
            }
            if best.as_ref().map_or(true, |b| d.abs() > b.d.abs()) {
                best = Some(Candidate { var: j, d });
            }
        }

        let Some(q) = best else {
            if !fresh {
                e.refactor()?;
                e.compute_basics();
                fresh = true;
                continue;
            }
            // Widened bounds contain the original ones, so infeasibility
            // carries over; an optimum needs cleaning up on the originals.
            if perturbed && !phase1 {
                e.restore_bounds(lower, upper);
                perturbed = false;
                stall = 0;
                continue;
            }
            let status = if phase1 { LpStatus::Infeasible } else { LpStatus::Optimal };
            return Ok(finish(e, status, y, iterations));
        };

        // Column of the entering variable in the current basis.
        alpha.iter_mut().for_each(|a| *a = 0.0);
        {
            let c = lp.column(q.var);
            for (&r, &v) in c.idx.iter().zip(c.val) {
                alpha[r] = v;
            }
        }
        e.lu.ftran(&mut alpha, &mut e.work);
        let dir = if q.d < 0.0 { 1.0 } else { -1.0 };

        let step = ratio_test(&e, &alpha, q.var, dir, bland, feas_tol);
        iterations += 1;
        let theta = match step {
            Step::Unbounded => {
                if phase1 {
                    return Err(SolverError::NumericalBreakdown("unbounded phase-1 ray"));
                }
                if !fresh {
                    e.refactor()?;
                    e.compute_basics();
                    fresh = true;
                    continue;
                }
                if perturbed {
                    e.restore_bounds(lower, upper);
                    perturbed = false;
                    continue;
                }
                return Ok(finish(e, LpStatus::Unbounded, y, iterations));
            }
            Step::Flip(t) => t,
            Step::Pivot { theta, .. } => theta,
        };

        // Move along the edge.
        e.x[q.var] += dir * theta;
        if theta != 0.0 {
            for p in 0..m {
                let a = alpha[p];
                if a != 0.0 {
                    e.x[e.head[p]] -= dir * theta * a;
                }
            }
        }
        match step {
            Step::Flip(_) => {
                e.state[q.var] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                e.x[q.var] = if dir > 0.0 { e.upper[q.var] } else { e.lower[q.var] };
            }
            Step::Pivot { pos, to_upper, .. } => {
                let out = e.head[pos];
                let fixed = e.lower[out] == e.upper[out];
                let (st, v) = if to_upper && !fixed {
                    (VarState::AtUpper, e.upper[out])
                } else if to_upper {
                    (VarState::AtLower, e.lower[out])
                } else {
                    (VarState::AtLower, e.lower[out])
                };
                e.state[out] = st;
                e.x[out] = v;
                e.head[pos] = q.var;
                e.state[q.var] = VarState::Basic;
                e.lu.push_eta(pos, &alpha);
                e.weights[pos] = 1.0;
                fresh = false;
            }
            Step::Unbounded => unreachable!(),
        }

        let progress = theta * q.d.abs();
        if progress > 1e-12 {
            stall = 0;
            if settings.pivot_rule != PivotRule::Bland {
                bland = false;
            }
        } else {
            stall += 1;
            if stall > stall_limit && !perturbation_used {
                e.perturb_bounds();
                perturbed = true;
                perturbation_used = true;
                stall = 0;
            } else if stall > stall_limit {
                bland = true;
            }
        }
    }
}

enum DualEnd {
    Feasible,
    Infeasible,
    TimeLimit,
    /// Not dual feasible, or stalling; the primal loop takes over.
    GiveUp,
}

/// Dual reduced costs further than this from feasibility skip the dual phase.
const DUAL_START_TOL: f64 = 1e-7;

/// Reduced costs of every variable for the current basis (zero for basic ones).
fn reduced_costs(e: &mut Engine<'_>, y: &mut [f64], d: &mut [f64]) {
    let lp = e.lp;
    for p in 0..lp.m {
        y[p] = cost_of(lp, e.head[p]);
    }
    e.lu.btran(y, &mut e.work);
    for j in 0..d.len() {
        d[j] = if e.state[j] == VarState::Basic { 0.0 } else { cost_of(lp, j) - lp.dot(j, y) };
    }
}

fn dual_phase(e: &mut Engine<'_>, clock: &dyn Clock, deadline: Option<f64>, iterations: &mut u64) -> Result<DualEnd, SolverError> {
    let lp = e.lp;
    let (m, n) = (lp.m, lp.n);
    let nt = n + m;
    let settings = e.settings;
    let opt_tol = settings.optimality_tol;
    let stall_limit = u64::from(settings.bland_stall_factor) * nt as u64;
    let mut stall = 0u64;
    let mut y = vec![0.0; m];
    let mut d = vec![0.0; nt];
    let mut rho = vec![0.0; m];
    let mut alpha = vec![0.0; m];
    let mut tau = vec![0.0; m];
    // Pivot row `rho' [A -I]`, dense over all variables, with its nonzeros listed.
    let mut arow = vec![0.0; nt];
    let mut touched: Vec<usize> = Vec::new();
    let mut seen = vec![false; nt];

    reduced_costs(e, &mut y, &mut d);
    for j in 0..nt {
        let bad = match e.state[j] {
            VarState::Basic => false,
            _ if e.lower[j] == e.upper[j] => false,
            VarState::AtLower => d[j] < -DUAL_START_TOL,
            VarState::AtUpper => d[j] > DUAL_START_TOL,
            VarState::Free => d[j].abs() > DUAL_START_TOL,
        };
        if bad {
            return Ok(DualEnd::GiveUp);
        }
    }
    let mut fresh = true;
    loop {
        if *iterations >= settings.max_iterations {
            return Err(SolverError::NumericalBreakdown("iteration limit"));
        }
        if let Some(t) = deadline {
            if *iterations % 64 == 0 && clock.seconds() >= t {
                return Ok(DualEnd::TimeLimit);
            }
        }
        if e.lu.n_etas() >= settings.refactor_interval as usize {
            e.refactor()?;
            e.compute_basics();
            reduced_costs(e, &mut y, &mut d);
            fresh = true;
        }

        // Leaving row: dual steepest edge.
        let mut leave: Option<(usize, f64)> = None;
        for p in 0..m {
            let inf = e.infeasibility(e.head[p]);
            if inf > 0.0 {
                let score = inf * inf / e.weights[p];
                if leave.map_or(true, |(_, b)| score > b) {
                    leave = Some((p, score));
                }
            }
        }
        let Some((r, _)) = leave else {
            return Ok(DualEnd::Feasible);
        };
        let infeas = e.infeasibility(e.head[r]);
        let out = e.head[r];
        let raise = e.x[out] < e.lower[out];
        let target = if raise { e.lower[out] } else { e.upper[out] };

        rho.iter_mut().for_each(|v| *v = 0.0);
        rho[r] = 1.0;
        e.lu.btran(&mut rho, &mut e.work);
        for &j in &touched {
            arow[j] = 0.0;
            seen[j] = false;
        }
        touched.clear();
        for i in 0..m {
            let ri = rho[i];
            if ri == 0.0 {
                continue;
            }
            for k in lp.row_start[i]..lp.row_start[i + 1] {
                let j = lp.row_col[k];
                if !seen[j] {
                    seen[j] = true;
                    touched.push(j);
                }
                arow[j] += ri * lp.row_val[k];
            }
            let j = n + i;
            seen[j] = true;
            touched.push(j);
            arow[j] = -ri;
        }

        // Dual ratio test (Harris). Moving nonbasic j by `dir` changes the
        // leaving variable by `-arow[j] * dir`.
        let sign = if raise { 1.0 } else { -1.0 };
        let mut theta_max = f64::INFINITY;
        let eligible = |j: usize| -> Option<(f64, f64)> {
            let st = e.state[j];
            if st == VarState::Basic || e.lower[j] == e.upper[j] {
                return None;
            }
            let a = arow[j];
            if a.abs() < PIVOT_TOL {
                return None;
            }
            let dir = -sign * a.signum();
            let ok = match st {
                VarState::AtLower => dir > 0.0,
                VarState::AtUpper => dir < 0.0,
                _ => true,
            };
            if !ok {
                return None;
            }
            let slack = if st == VarState::Free { d[j].abs() } else { (d[j] * dir).max(0.0) };
            Some((slack, a.abs()))
        };
        for &j in &touched {
            if let Some((slack, a)) = eligible(j) {
                theta_max = theta_max.min((slack + opt_tol) / a);
            }
        }
        let mut best: Option<(usize, f64, f64)> = None;
        for &j in &touched {
            if let Some((slack, a)) = eligible(j) {
                let ratio = slack / a;
                let better = match best {
                    None => true,
                    Some((bj, _, ba)) => a > ba || (a == ba && j < bj),
                };
                if ratio <= theta_max && better {
                    best = Some((j, ratio, a));
                }
            }
        }
        let Some((q, theta_d, _)) = best else {
            if !fresh {
                e.refactor()?;
                e.compute_basics();
                reduced_costs(e, &mut y, &mut d);
                fresh = true;
                continue;
            }
            return Ok(DualEnd::Infeasible);
        };
        let a_rq = arow[q];

        alpha.iter_mut().for_each(|a| *a = 0.0);
        {
            let c = lp.column(q);
            for (&row, &v) in c.idx.iter().zip(c.val) {
                alpha[row] = v;
            }
        }
        e.lu.ftran(&mut alpha, &mut e.work);
        if (alpha[r] - a_rq).abs() > 1e-6 * (1.0 + a_rq.abs()) && !fresh {
            e.refactor()?;
            e.compute_basics();
            reduced_costs(e, &mut y, &mut d);
            fresh = true;
            continue;
        }
        *iterations += 1;

        // Steepest-edge weights, with `tau = B^-1 rho`.
        let w_r = rho.iter().map(|v| v * v).sum::<f64>();
        tau.copy_from_slice(&rho);
        e.lu.ftran(&mut tau, &mut e.work);
        let a_r = alpha[r];
        for p in 0..m {
            let a = alpha[p];
            if p == r || a == 0.0 {
                continue;
            }
            let ratio = a / a_r;
            let w = e.weights[p] - 2.0 * ratio * tau[p] + ratio * ratio * w_r;
            e.weights[p] = w.max(ratio * ratio * w_r).max(1e-8);
        }
        e.weights[r] = (w_r / (a_r * a_r)).max(1e-8);

        // Dual update.
        let t_d = d[q] / a_rq;
        if t_d != 0.0 {
            for &j in &touched {
                if e.state[j] != VarState::Basic {
                    d[j] -= t_d * arow[j];
                }
            }
        }
        d[q] = 0.0;
        d[out] = -t_d;

        // Primal update.
        let t = (e.x[out] - target) / alpha[r];
        e.x[q] += t;
        if t != 0.0 {
            for p in 0..m {
                if alpha[p] != 0.0 {
                    e.x[e.head[p]] -= alpha[p] * t;
                }
            }
        }
        e.x[out] = target;
        e.state[out] = if !raise && e.lower[out] != e.upper[out] { VarState::AtUpper } else { VarState::AtLower };
        e.head[r] = q;
        e.state[q] = VarState::Basic;
        e.lu.push_eta(r, &alpha);
        fresh = false;

        if theta_d * infeas > 1e-12 {
            stall = 0;
        } else {
            stall += 1;
            if stall > stall_limit {
                return Ok(DualEnd::GiveUp);
            }
        }
    }
}

fn cost_of(lp: &Compiled, j: usize) -> f64 {
    if j < lp.n {
        lp.cost[j]
    } else {
        0.0
    }
}

fn ratio_test(e: &Engine<'_>, alpha: &[f64], q: usize, dir: f64, bland: bool, tol: f64) -> Step {
    let range = e.upper[q] - e.lower[q];
    // Bound each basic variable moves toward, if any. A variable already
    // outside its bounds blocks where it becomes feasible.
    let target = |p: usize| -> Option<(f64, f64, bool)> {
        let a = alpha[p];
        if a.abs() < PIVOT_TOL {
            return None;
        }
        let delta = -dir * a;
        let j = e.head[p];
        let (l, u, v) = (e.lower[j], e.upper[j], e.x[j]);
        let (bound, to_upper) = if delta > 0.0 {
            if v < l - tol {
                (l, false)
            } else if v <= u + tol {
                (u, true)
            } else {
                return None;
            }
        } else if v > u + tol {
            (u, true)
        } else if v >= l - tol {
            (l, false)
        } else {
            return None;
        };
        if !bound.is_finite() {
            return None;
        }
        Some((bound, delta, to_upper))
    };

    if bland {
        let mut best: Option<(f64, usize, usize, bool)> = None;
        for p in 0..alpha.len() {
            if let Some((bound, delta, to_upper)) = target(p) {
                let ratio = ((bound - e.x[e.head[p]]) / delta).max(0.0);
                let better = match best {
                    None => true,
                    Some((r, _, var, _)) => ratio < r - 1e-12 || (ratio <= r + 1e-12 && e.head[p] < var),
                };
                if better {
                    best = Some((ratio, p, e.head[p], to_upper));
                }
            }
        }
        return match best {
            Some((theta, _, _, _)) if range <= theta => Step::Flip(range),
            Some((theta, pos, _, to_upper)) => Step::Pivot { pos, theta, to_upper },
            None if range.is_finite() => Step::Flip(range),
            None => Step::Unbounded,
        };
    }

    // Harris pass 1: largest step with bounds relaxed by the tolerance.
    let mut theta_max = f64::INFINITY;
    for p in 0..alpha.len() {
        if let Some((bound, delta, _)) = target(p) {
            let v = e.x[e.head[p]];
            let relaxed = if delta > 0.0 { bound + tol - v } else { bound - tol - v };
            theta_max = theta_max.min((relaxed / delta).max(0.0));
        }
    }
    if range.is_finite() && range <= theta_max {
        return Step::Flip(range);
    }
    if theta_max == f64::INFINITY {
        return Step::Unbounded;
    }
    // Pass 2: among the steps within that limit, the largest pivot.
    let mut best: Option<(f64, usize, bool)> = None;
    let mut best_abs = 0.0;
    for p in 0..alpha.len() {
        if let Some((bound, delta, to_upper)) = target(p) {
            let ratio = ((bound - e.x[e.head[p]]) / delta).max(0.0);
            if ratio <= theta_max && alpha[p].abs() > best_abs {
                best_abs = alpha[p].abs();
                best = Some((ratio, p, to_upper));
            }
        }
    }
    match best {
        Some((theta, pos, to_upper)) => Step::Pivot { pos, theta, to_upper },
        None => Step::Unbounded,
    }
}

fn finish(e: Engine<'_>, status: LpStatus, y: Vec<f64>, iterations: u64) -> LpResult {
    let n = e.lp.n;
    let mut x = e.x[..n].to_vec();
    // Nonbasic structurals sit exactly on their bounds already; clip basic
    // ones that drifted within tolerance.
    for (j, v) in x.iter_mut().enumerate() {
        if e.state[j] == VarState::Basic {
            *v = v.clamp(e.lower[j], e.upper[j].max(e.lower[j]));
        }
    }
    let objective = x.iter().zip(&e.lp.cost).map(|(x, c)| x * c).sum();
    LpResult {
        status,
        x,
        y,
        objective,
        iterations,
        basis: Rc::new(WarmBasis { head: e.head, state: e.state, weights: e.weights }),
    }
}
