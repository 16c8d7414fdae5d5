//! Experiment plan: one set of fixed parameters, a list of confounding trials
//! (data windows and seeds), and a list of treatments (the decision models
//! under comparison). Every (trial, treatment) pair is one test set.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formulations::NetworkMode;
use crate::metrics::MetricName;
use crate::rng::Prng;
use crate::scenario::ScenarioSpec;
use crate::simulation::{Chronology, ChronologyKind};
use crate::solver::SolverSettings;
use crate::system::System;

/// Days of simulated data available to trial windows.
pub const DATA_DAYS: u32 = 365;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("at least one trial is required")]
    NoTrials,
    #[error("at least one treatment is required")]
    NoTreatments,
    #[error("window length must be at least one day")]
    EmptyWindow,
    #[error("{n_trials} windows of {window_days} days exceed the {data_days} days of data")]
    WindowOverrun { n_trials: u32, window_days: u32, data_days: u32 },
    #[error("treatment {0} appears twice")]
    DuplicateTreatment(&'static str),
    #[error("treatment {kind}: {reason}")]
    InvalidTreatment { kind: &'static str, reason: String },
    #[error("invalid experiment parameters: {0}")]
    InvalidParameters(String),
}

/// Inputs held fixed across every test set of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParameters {
    pub system: System,
    /// Profile name to the reference of its annual data, as given in the
    /// experiment configuration.
    pub profile_refs: BTreeMap<String, String>,
    /// Emulator step, seconds.
    pub emulator_resolution_s: u32,
    /// Emulator steps per emulator execution.
    pub ed_steps: u32,
    /// Decision-model horizon, hours.
    pub horizon_h: u32,
    pub master_seed: u64,
    pub solver: SolverSettings,
    /// $/MWh charged on shed load.
    pub value_of_lost_load: f64,
    pub network: NetworkMode,
    pub metrics: Vec<MetricName>,
}

impl ExperimentParameters {
    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |s: String| Err(PlanError::InvalidParameters(s));
        let res = self.emulator_resolution_s;
        if res == 0 || 3600 % res != 0 {
            return bad(format!("emulator resolution {res} s must divide one hour"));
        }
        if u64::from(res) * u64::from(self.ed_steps) != 3600 {
            return bad(format!("{} steps of {res} s do not cover one hour", self.ed_steps));
        }
        if self.horizon_h == 0 {
            return bad("horizon must be at least one hour".into());
        }
        if u64::from(res) >= u64::from(self.horizon_h) * 3600 {
            return bad("emulator step must be shorter than the decision interval".into());
        }
        if !(self.value_of_lost_load > 0.0) || !self.value_of_lost_load.is_finite() {
            return bad("value_of_lost_load must be positive".into());
        }
        self.solver.validate().map_err(|e| PlanError::InvalidParameters(format!("{e}")))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfoundingTrial {
    pub trial_index: u32,
    pub window_start_day: u32,
    pub window_length_days: u32,
    pub trial_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TreatmentKind {
    #[serde(rename = "uc")]
    DeterministicUc,
    #[serde(rename = "suc")]
    StochasticUc,
    #[serde(rename = "ruc")]
    RollingUc,
}

impl TreatmentKind {
    pub fn tag(self) -> &'static str {
        match self {
            TreatmentKind::DeterministicUc => "uc",
            TreatmentKind::StochasticUc => "suc",
            TreatmentKind::RollingUc => "ruc",
        }
    }
}

/// What the decision model sees of the uncertain injections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastSpec {
    Point,
    Scenarios(ScenarioSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Treatment {
    pub kind: TreatmentKind,
    pub forecast: ForecastSpec,
    pub chronology: Chronology,
}

impl Treatment {
    pub fn deterministic() -> Treatment {
        Treatment { kind: TreatmentKind::DeterministicUc, forecast: ForecastSpec::Point, chronology: Chronology::daily() }
    }

    pub fn stochastic(spec: ScenarioSpec) -> Treatment {
        Treatment {
            kind: TreatmentKind::StochasticUc,
            forecast: ForecastSpec::Scenarios(spec),
            chronology: Chronology::daily(),
        }
    }

    pub fn rolling(lookahead_h: u32, apply_h: u32) -> Treatment {
        Treatment {
            kind: TreatmentKind::RollingUc,
            forecast: ForecastSpec::Point,
            chronology: Chronology::receding(lookahead_h, apply_h),
        }
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let kind = self.kind.tag();
        let fail = |reason: &str| Err(PlanError::InvalidTreatment { kind, reason: reason.into() });
        self.chronology.validate().map_err(|reason| PlanError::InvalidTreatment { kind, reason })?;
        match (self.kind, &self.forecast, self.chronology.kind) {
            (TreatmentKind::StochasticUc, ForecastSpec::Scenarios(spec), ChronologyKind::Synchronized) => {
                spec.validate().map_err(|e| PlanError::InvalidTreatment { kind, reason: format!("{e}") })
            }
            (TreatmentKind::StochasticUc, ForecastSpec::Point, _) => fail("needs a scenario forecast"),
            (TreatmentKind::DeterministicUc, ForecastSpec::Point, ChronologyKind::Synchronized) => Ok(()),
            (TreatmentKind::DeterministicUc, ForecastSpec::Scenarios(_), _) => fail("takes a point forecast"),
            (TreatmentKind::RollingUc, ForecastSpec::Point, ChronologyKind::RecedingHorizon) => Ok(()),
            (TreatmentKind::RollingUc, ForecastSpec::Scenarios(_), _) => fail("takes a point forecast"),
            (TreatmentKind::RollingUc, _, ChronologyKind::Synchronized) => fail("needs a receding-horizon chronology"),
            (_, _, ChronologyKind::RecedingHorizon) => fail("needs a synchronized chronology"),
        }
    }
}

/// One simulation case: a trial paired with a treatment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSet {
    pub id: String,
    pub trial: usize,
    pub treatment: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub parameters: ExperimentParameters,
    pub trials: Vec<ConfoundingTrial>,
    pub treatments: Vec<Treatment>,
    /// Trial-major cross product.
    pub test_sets: Vec<TestSet>,
}

impl ExperimentPlan {
    pub fn trial_of(&self, ts: &TestSet) -> &ConfoundingTrial {
        &self.trials[ts.trial]
    }

    pub fn treatment_of(&self, ts: &TestSet) -> &Treatment {
        &self.treatments[ts.treatment]
    }
}

/// Seed of trial `trial_index`: output number `trial_index + 1` of a
/// splitmix64 stream seeded with `master_seed`.
pub fn derive_trial_seed(master_seed: u64, trial_index: u32) -> u64 {
    let mut prng = Prng::new(master_seed);
    let mut out = 0;
    for _ in 0..=trial_index {
        out = prng.next_u64();
    }
    out
}

/// Start day of trial `i` of `n`: evenly spread so the first window starts on
/// day 0 and the last one ends on the final day.
pub fn window_start(i: u32, n: u32, window_days: u32) -> u32 {
    if n <= 1 {
        0
    } else {
        (u64::from(i) * u64::from(DATA_DAYS - window_days) / u64::from(n - 1)) as u32
    }
}

pub fn test_set_id(trial_index: u32, kind: TreatmentKind) -> String {
    format!("t{trial_index:03}-{}", kind.tag())
}

pub fn build_plan(
    params: ExperimentParameters,
    n_trials: u32,
    window_days: u32,
    treatments: Vec<Treatment>,
) -> Result<ExperimentPlan, PlanError> {
    if n_trials == 0 {
        return Err(PlanError::NoTrials);
    }
    if window_days == 0 {
        return Err(PlanError::EmptyWindow);
    }
    if treatments.is_empty() {
        return Err(PlanError::NoTreatments);
    }
    if u64::from(n_trials) * u64::from(window_days) > u64::from(DATA_DAYS) {
        return Err(PlanError::WindowOverrun { n_trials, window_days, data_days: DATA_DAYS });
    }
    params.validate()?;
    for (i, t) in treatments.iter().enumerate() {
        t.validate()?;
        if treatments[..i].iter().any(|o| o.kind == t.kind) {
            return Err(PlanError::DuplicateTreatment(t.kind.tag()));
        }
        if (window_days * 24) % t.chronology.apply_h != 0 {
            return Err(PlanError::InvalidTreatment {
                kind: t.kind.tag(),
                reason: format!("apply window {} h does not divide the {window_days}-day window", t.chronology.apply_h),
            });
        }
    }
    let trials: Vec<ConfoundingTrial> = (0..n_trials)
        .map(|i| ConfoundingTrial {
            trial_index: i,
            window_start_day: window_start(i, n_trials, window_days),
            window_length_days: window_days,
            trial_seed: derive_trial_seed(params.master_seed, i),
        })
        .collect();
    let mut test_sets = Vec::with_capacity(trials.len() * treatments.len());
    for (ti, trial) in trials.iter().enumerate() {
        for (k, t) in treatments.iter().enumerate() {
            test_sets.push(TestSet { id: test_set_id(trial.trial_index, t.kind), trial: ti, treatment: k });
        }
    }
    Ok(ExperimentPlan { parameters: params, trials, treatments, test_sets })
}
