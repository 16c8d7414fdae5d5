//! LP and MILP solving.
//!
//! [`solve_lp`] runs a bounded two-phase revised simplex over a sparse LU
//! factorization of the basis. [`solve_milp`] runs best-first branch and bound
//! on top of it. Both are deterministic: the same model and settings produce
//! the same iteration counts, node counts and primal bits. Only the wall time
//! depends on the [`Clock`].

mod bnb;
mod lpfile;
mod lu;
mod model;
mod simplex;
mod verify;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use alloc::vec::Vec;

pub use lpfile::write_lp;
pub use model::{RowSense, StandardFormMP};
pub use verify::{duality_gap, verify_solution, VerifyReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("malformed model: {0}")]
    Malformed(&'static str),
    #[error("column {0} has invalid bounds")]
    InvalidBounds(usize),
    #[error("solve_lp called on a model with integer columns")]
    IntegralityPresent,
    #[error("invalid solver settings: {0}")]
    InvalidSettings(&'static str),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NodeLimit,
    TimeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PivotRule {
    /// Largest reduced cost, switching to Bland's rule while stalled.
    Dantzig,
    /// Smallest eligible index throughout.
    Bland,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub integrality_tol: f64,
    /// Relative gap `(incumbent - bound) / max(1, |incumbent|)` at which
    /// branch and bound stops.
    pub mip_gap: f64,
    pub node_limit: u64,
    pub time_limit_s: Option<f64>,
    pub pivot_rule: PivotRule,
    /// Pivots between basis refactorizations.
    pub refactor_interval: u32,
    /// Bland's rule engages after `factor * (m + n)` pivots without progress.
    pub bland_stall_factor: u32,
    /// Simplex iterations allowed per LP before reporting a breakdown.
    pub max_iterations: u64,
    /// Rounding dive at the root to find an early incumbent.
    pub dive_heuristic: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            integrality_tol: 1e-6,
            mip_gap: 1e-4,
            node_limit: 100_000,
            time_limit_s: None,
            pivot_rule: PivotRule::Dantzig,
            refactor_interval: 100,
            bland_stall_factor: 5,
            max_iterations: 10_000_000,
            dive_heuristic: true,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), SolverError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.feasibility_tol) {
            return Err(SolverError::InvalidSettings("feasibility_tol must be > 0"));
        }
        if !positive(self.optimality_tol) {
            return Err(SolverError::InvalidSettings("optimality_tol must be > 0"));
        }
        if !positive(self.integrality_tol) || self.integrality_tol >= 0.5 {
            return Err(SolverError::InvalidSettings("integrality_tol must be in (0, 0.5)"));
        }
        if !positive(self.mip_gap) {
            return Err(SolverError::InvalidSettings("mip_gap must be > 0"));
        }
        if self.node_limit == 0 {
            return Err(SolverError::InvalidSettings("node_limit must be >= 1"));
        }
        if let Some(t) = self.time_limit_s {
            if !positive(t) {
                return Err(SolverError::InvalidSettings("time_limit_s must be > 0"));
            }
        }
        if self.refactor_interval == 0 {
            return Err(SolverError::InvalidSettings("refactor_interval must be >= 1"));
        }
        if self.bland_stall_factor == 0 {
            return Err(SolverError::InvalidSettings("bland_stall_factor must be >= 1"));
        }
        if self.max_iterations == 0 {
            return Err(SolverError::InvalidSettings("max_iterations must be >= 1"));
        }
        Ok(())
    }
}

/// Source of elapsed seconds.
///
/// The core crate has no access to a system clock; callers that want wall
/// times or time limits pass one in.
pub trait Clock {
    /// Seconds since an arbitrary fixed origin; must be non-decreasing.
    fn seconds(&self) -> f64;
}

/// A clock that never advances. Wall times come out as zero and time limits
/// never trigger.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn seconds(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: SolveStatus,
    /// Column values; empty when no feasible point is known.
    pub primal: Vec<f64>,
    /// Objective of `primal` including the model offset.
    pub objective: Option<f64>,
    /// Row duals for LPs; empty for MILPs.
    pub duals: Vec<f64>,
    /// Proven lower bound (MILP only).
    pub best_bound: Option<f64>,
    pub iterations: u64,
    pub nodes: u64,
    pub wall_time_s: f64,
}

impl Solution {
    pub fn has_primal(&self) -> bool {
        !self.primal.is_empty()
    }
}

/// Pluggable solver behind the [`Solution`] contract.
pub trait Optimizer: Sync {
    fn name(&self) -> &str;
    fn solve(&self, mp: &StandardFormMP, settings: &SolverSettings, clock: &dyn Clock) -> Result<Solution, SolverError>;
}

/// The bundled simplex and branch-and-bound solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuiltinSolver;

impl Optimizer for BuiltinSolver {
    fn name(&self) -> &str {
        "builtin-simplex-bnb"
    }

    fn solve(&self, mp: &StandardFormMP, settings: &SolverSettings, clock: &dyn Clock) -> Result<Solution, SolverError> {
        solve_milp_with_clock(mp, settings, clock)
    }
}

pub fn solve_lp(mp: &StandardFormMP, settings: &SolverSettings) -> Result<Solution, SolverError> {
    solve_lp_with_clock(mp, settings, &NoClock)
}

pub fn solve_lp_with_clock(mp: &StandardFormMP, settings: &SolverSettings, clock: &dyn Clock) -> Result<Solution, SolverError> {
    mp.check()?;
    settings.validate()?;
    if mp.has_integers() {
        return Err(SolverError::IntegralityPresent);
    }
    let t0 = clock.seconds();
    let lp = simplex::Compiled::new(mp);
    let deadline = settings.time_limit_s.map(|t| t0 + t);
    let res = simplex::solve(&lp, &lp.lower, &lp.upper, None, settings, clock, deadline)?;
    let status = match res.status {
        simplex::LpStatus::Optimal => SolveStatus::Optimal,
        simplex::LpStatus::Infeasible => SolveStatus::Infeasible,
        simplex::LpStatus::Unbounded => SolveStatus::Unbounded,
        simplex::LpStatus::TimeLimit => SolveStatus::TimeLimit,
    };
    let optimal = status == SolveStatus::Optimal;
    Ok(Solution {
        status,
        objective: optimal.then(|| res.objective + mp.objective_offset),
        primal: if optimal { res.x } else { Vec::new() },
        duals: if optimal { res.y } else { Vec::new() },
        best_bound: None,
        iterations: res.iterations,
        nodes: 0,
        wall_time_s: (clock.seconds() - t0).max(0.0),
    })
}

/// Solves a MILP; models without integer columns go straight to
/// [`solve_lp`].
pub fn solve_milp(mp: &StandardFormMP, settings: &SolverSettings) -> Result<Solution, SolverError> {
    solve_milp_with_clock(mp, settings, &NoClock)
}

pub fn solve_milp_with_clock(mp: &StandardFormMP, settings: &SolverSettings, clock: &dyn Clock) -> Result<Solution, SolverError> {
    if !mp.has_integers() {
        return solve_lp_with_clock(mp, settings, clock);
    }
    mp.check()?;
    settings.validate()?;
    bnb::solve(mp, settings, clock)
}
