//! Core of the operations-experiment harness.
//!
//! Everything in this crate is a pure function of its inputs: the grid data
//! model, seeded scenario generation, the experiment plan, the unit-commitment
//! and economic-dispatch formulations, the simplex / branch-and-bound solver,
//! the simulation chronologies and the metric aggregation. File formats,
//! archives, wall-clock timing and the command line live in the `opsim` crate.
//!
//! The crate is `no_std` and only needs an allocator.

#![no_std]
#![deny(rust_2018_idioms)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod experiment;
pub mod formulations;
pub mod metrics;
pub mod rng;
pub mod scenario;
pub mod series;
pub mod simulation;
pub mod solver;
pub mod system;

mod fnv;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use experiment::{
    build_plan, derive_trial_seed, ConfoundingTrial, ExperimentParameters, ExperimentPlan,
    ForecastSpec, TestSet, Treatment, TreatmentKind,
};
pub use formulations::{
    build_ed, build_suc, build_uc, CommitmentSchedule, DispatchResult, ModelContext, NetworkMode,
    SystemState, VarMap,
};
pub use metrics::{aggregate, compute_metrics, MetricName, MetricRecord, MetricsError, SummaryStats};
pub use rng::Prng;
pub use scenario::{gen_point_forecast, gen_scenario_set, ScenarioSpec};
pub use series::{resample_stepwise, ForecastSet, RealizationSeries, SeriesId, TimeSeries};
pub use simulation::{advance_state, isolation_guard, run_case, CaseOutcome, CaseRun, Chronology, ChronologyKind, DecisionStep, ExecutionRecord, TrialData};
pub use solver::{
    solve_lp, solve_milp, verify_solution, Clock, Solution, SolveStatus, SolverSettings,
    StandardFormMP,
};
pub use system::{validate_system, System, Violation};
