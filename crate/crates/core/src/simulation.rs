//! Runs one test set: decision models on forecasts, the emulator on
//! realizations, and the unit state carried across every boundary.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::experiment::{ExperimentPlan, ForecastSpec, TestSet, TreatmentKind};
use crate::formulations::{
    build_ed, build_suc, build_uc, extract_commitment, extract_dispatch, CommitmentSchedule, DispatchResult, EdInputs,
    FormulationError, ModelContext, ModelKind, SystemState, UnitState,
};
use crate::rng::Prng;
use crate::scenario::{gen_point_forecast, gen_scenario_set, SECONDS_PER_DAY, SECONDS_PER_HOUR};
use crate::series::{ForecastOrigin, ForecastSet, RealizationSeries};
use crate::solver::{Clock, Optimizer, SolveStatus, Solution, StandardFormMP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChronologyKind {
    /// Each decision covers exactly the hours it is applied to.
    Synchronized,
    /// Each decision looks further ahead than it is applied.
    RecedingHorizon,
}

/// Timing of decision executions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chronology {
    pub kind: ChronologyKind,
    /// Hours between decision executions.
    pub decision_interval_h: u32,
    /// Hours covered by each decision model.
    pub lookahead_h: u32,
    /// Hours of each decision handed to the emulator.
    pub apply_h: u32,
}

impl Chronology {
    pub fn daily() -> Chronology {
        Chronology { kind: ChronologyKind::Synchronized, decision_interval_h: 24, lookahead_h: 24, apply_h: 24 }
    }

    pub fn receding(lookahead_h: u32, apply_h: u32) -> Chronology {
        Chronology { kind: ChronologyKind::RecedingHorizon, decision_interval_h: apply_h, lookahead_h, apply_h }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.apply_h == 0 {
            return Err("apply window must be at least one hour".into());
        }
        if self.lookahead_h < self.apply_h {
            return Err("lookahead must cover the apply window".into());
        }
        if self.decision_interval_h != self.apply_h {
            return Err("decision interval must equal the apply window".into());
        }
        match self.kind {
            ChronologyKind::Synchronized if self.lookahead_h != self.apply_h => {
                Err("synchronized decisions apply their whole horizon".into())
            }
            ChronologyKind::RecedingHorizon if self.lookahead_h == self.apply_h => {
                Err("receding horizon needs lookahead beyond the apply window".into())
            }
            _ => Ok(()),
        }
    }
}

/// Realized annual data of one trial, at emulator resolution. Series start at
/// least one day before the trial window so persistence forecasts have
/// history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialData {
    pub wind: Vec<RealizationSeries>,
    pub load: Vec<RealizationSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    pub model: ModelKind,
    /// Simulated time at launch, seconds.
    pub sim_time: i64,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub iterations: u64,
    pub nodes: u64,
    pub rows: usize,
    pub cols: usize,
    pub wall_time_s: f64,
}

/// One decision execution and what came out of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionStep {
    pub start: i64,
    pub schedule: CommitmentSchedule,
    /// Hours of the schedule passed to the emulator.
    pub applied_h: u32,
    /// No-load cost of the applied hours, $.
    pub no_load_cost: f64,
    /// Startup cost of the applied hours, $.
    pub startup_cost: f64,
    pub wind_forecasts: Vec<ForecastSet>,
    pub load_forecasts: Vec<ForecastSet>,
    /// State the decision model started from.
    pub initial_state: SystemState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CaseOutcome {
    Completed,
    Aborted { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRun {
    pub test_set: String,
    pub trial_index: u32,
    pub treatment: TreatmentKind,
    pub outcome: CaseOutcome,
    /// Every solve in launch order.
    pub records: Vec<ExecutionRecord>,
    pub decisions: Vec<DecisionStep>,
    /// One per emulator execution, in order.
    pub dispatches: Vec<DispatchResult>,
    pub final_state: SystemState,
}

impl CaseRun {
    pub fn completed(&self) -> bool {
        self.outcome == CaseOutcome::Completed
    }
}

/// Decision executions and emulator executions per decision for a window.
pub fn execution_counts(window_days: u32, apply_h: u32, ed_hours_per_execution: u32) -> (u32, u32) {
    (window_days * 24 / apply_h, apply_h / ed_hours_per_execution)
}

/// State after one emulator execution of `hours` hours with the given status.
pub fn advance_state(state: &SystemState, status: &[bool], dispatch: &DispatchResult) -> SystemState {
    let hours = (dispatch.periods() as u64 * u64::from(dispatch.step_s) / 3600).max(1) as i32;
    let units = state
        .units
        .iter()
        .zip(status)
        .enumerate()
        .map(|(g, (u, &on))| {
            let hours_in_state = match (u.on(), on) {
                (true, true) => u.hours_in_state + hours,
                (false, false) => u.hours_in_state - hours,
                (false, true) => hours,
                (true, false) => -hours,
            };
            UnitState { hours_in_state, last_dispatch: dispatch.thermal_mw[g].last().copied() }
        })
        .collect();
    SystemState { units }
}

/// Rejects any forecast that is, or claims to be, one of the realizations.
pub fn isolation_guard<'f>(
    forecasts: impl IntoIterator<Item = &'f ForecastSet>,
    realizations: &[RealizationSeries],
) -> Result<(), FormulationError> {
    for f in forecasts {
        let copied = matches!(f.origin, ForecastOrigin::CopiedRealization { .. });
        if copied || realizations.iter().any(|r| r.id == f.id) {
            return Err(FormulationError::ForecastLeakage { owner: f.owner.clone() });
        }
    }
    Ok(())
}

struct Runner<'a> {
    plan: &'a ExperimentPlan,
    ctx: ModelContext<'a>,
    solver: &'a dyn Optimizer,
    clock: &'a dyn Clock,
    run: CaseRun,
}

impl Runner<'_> {
    fn solve(&mut self, model: ModelKind, sim_time: i64, mp: &StandardFormMP) -> Result<Solution, String> {
        let t0 = self.clock.seconds();
        let sol = self
            .solver
            .solve(mp, &self.plan.parameters.solver, self.clock)
            .map_err(|e| format!("{} at t={sim_time}: {e}", model.tag()))?;
        let wall = (self.clock.seconds() - t0).max(0.0);
        self.run.records.push(ExecutionRecord {
            model,
            sim_time,
            status: sol.status,
            objective: sol.objective,
            iterations: sol.iterations,
            nodes: sol.nodes,
            rows: mp.n_rows(),
            cols: mp.n_cols(),
            wall_time_s: wall,
        });
        Ok(sol)
    }

    fn step(&mut self, ts: &TestSet, data: &TrialData, k: u32, prng: &mut Prng) -> Result<(), String> {
        let treatment = self.plan.treatment_of(ts);
        let trial = self.plan.trial_of(ts);
        let chron = treatment.chronology;
        let start = (i64::from(trial.window_start_day) * 24 + i64::from(k) * i64::from(chron.apply_h)) * SECONDS_PER_HOUR;
        let lookahead = chron.lookahead_h as usize;
        let err = |e: &dyn core::fmt::Display| format!("decision at t={start}: {e}");

        let point = |series: &[RealizationSeries]| -> Result<Vec<ForecastSet>, String> {
            series.iter().map(|r| gen_point_forecast(r, start, lookahead).map_err(|e| err(&e))).collect()
        };
        let load_fc = point(&data.load)?;
        let wind_point = point(&data.wind)?;
        let wind_fc = match &treatment.forecast {
            ForecastSpec::Point => wind_point,
            ForecastSpec::Scenarios(spec) => wind_point
                .iter()
                .map(|p| gen_scenario_set(prng, p, spec).map_err(|e| err(&e)))
                .collect::<Result<Vec<_>, _>>()?,
        };
        let realized: Vec<RealizationSeries> = data.wind.iter().chain(&data.load).cloned().collect();
        isolation_guard(wind_fc.iter().chain(&load_fc), &realized).map_err(|e| err(&e))?;

        let state = self.run.final_state.clone();
        let horizon = chron.lookahead_h;
        let (kind, built) = match treatment.kind {
            TreatmentKind::StochasticUc => (ModelKind::Suc, build_suc(&self.ctx, &wind_fc, &load_fc, &state, horizon)),
            TreatmentKind::DeterministicUc | TreatmentKind::RollingUc => {
                (ModelKind::Uc, build_uc(&self.ctx, &wind_fc, &load_fc, &state, horizon))
            }
        };
        let (mp, vm) = built.map_err(|e| err(&e))?;
        let sol = self.solve(kind, start, &mp)?;
        let schedule = extract_commitment(&sol, &vm, &self.ctx).map_err(|e| err(&e))?;
        let (no_load_cost, startup_cost) = schedule.commitment_cost(self.ctx.system, chron.apply_h as usize);

        let params = &self.plan.parameters;
        let steps = params.ed_steps as usize;
        let step_s = params.emulator_resolution_s;
        for h in 0..chron.apply_h as usize {
            let t = start + h as i64 * SECONDS_PER_HOUR;
            let slice = |series: &[RealizationSeries]| -> Result<Vec<RealizationSeries>, String> {
                series
                    .iter()
                    .map(|r| r.slice(t, steps).map_err(|e| format!("emulator at t={t}: {} {e}", r.owner)))
                    .collect()
            };
            let wind = slice(&data.wind)?;
            let load = slice(&data.load)?;
            isolation_guard(wind_fc.iter().chain(&load_fc), &wind).map_err(|e| err(&e))?;
            let status = schedule.hour(h);
            let current = self.run.final_state.clone();
            let inputs = EdInputs { wind: &wind, load: &load, status: &status };
            let (mp, vm) = build_ed(&self.ctx, &inputs, &current, steps, step_s).map_err(|e| format!("emulator at t={t}: {e}"))?;
            let sol = self.solve(ModelKind::Ed, t, &mp)?;
            if sol.status != SolveStatus::Optimal {
                return Err(format!("emulator at t={t}: status {:?} despite slack variables", sol.status));
            }
            let dispatch = extract_dispatch(&sol, &vm, &self.ctx, 0).map_err(|e| format!("emulator at t={t}: {e}"))?;
            self.run.final_state = advance_state(&current, &status, &dispatch);
            self.run.dispatches.push(dispatch);
        }
        self.run.decisions.push(DecisionStep {
            start,
            schedule,
            applied_h: chron.apply_h,
            no_load_cost,
            startup_cost,
            wind_forecasts: wind_fc,
            load_forecasts: load_fc,
            initial_state: state,
        });
        Ok(())
    }
}

/// Executes every decision step of a test set in order. Failures end the
/// case early with the reason recorded; everything produced up to that point
/// is kept.
pub fn run_case(plan: &ExperimentPlan, ts: &TestSet, data: &TrialData, solver: &dyn Optimizer, clock: &dyn Clock) -> CaseRun {
    let trial = plan.trial_of(ts);
    let treatment = plan.treatment_of(ts);
    let params = &plan.parameters;
    let sys = &params.system;
    let mut run = CaseRun {
        test_set: ts.id.clone(),
        trial_index: trial.trial_index,
        treatment: treatment.kind,
        outcome: CaseOutcome::Completed,
        records: Vec::new(),
        decisions: Vec::new(),
        dispatches: Vec::new(),
        final_state: SystemState::initial(sys),
    };
    let ctx = match ModelContext::new(sys, params.value_of_lost_load, params.network) {
        Ok(ctx) => ctx,
        Err(e) => {
            run.outcome = CaseOutcome::Aborted { reason: format!("{e}") };
            return run;
        }
    };
    let window_start = i64::from(trial.window_start_day) * SECONDS_PER_DAY;
    for r in data.wind.iter().chain(&data.load) {
        if r.series.start > window_start - SECONDS_PER_DAY {
            run.outcome = CaseOutcome::Aborted { reason: format!("{}: no history before the trial window", r.owner) };
            return run;
        }
    }
    let mut runner = Runner { plan, ctx, solver, clock, run };
    let mut prng = Prng::new(trial.trial_seed);
    let (steps, _) = execution_counts(trial.window_length_days, treatment.chronology.apply_h, 1);
    for k in 0..steps {
        if let Err(reason) = runner.step(ts, data, k, &mut prng) {
            runner.run.outcome = CaseOutcome::Aborted { reason };
            break;
        }
    }
    runner.run
}
