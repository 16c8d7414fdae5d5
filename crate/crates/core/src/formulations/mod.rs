//! Unit-commitment decision models, the economic-dispatch emulator, and
//! extraction of typed results from their solutions.
//!
//! All three models share one set of physical constraints per dispatch
//! period:
//!
//! * nodal balance with load-shed and over-generation slacks, both priced at
//!   the value of lost load;
//! * output `p = p_min * u + sum of segment outputs`, each segment bounded by
//!   its width and priced at its marginal cost;
//! * `sum of segments <= (p_max - p_min) * u`;
//! * ramp limits between consecutive periods;
//! * DC flows `flow = base_power * susceptance * (angle_from - angle_to)`
//!   bounded by the line limit, with the reference angle fixed at zero (or a
//!   single copper-plate balance per period);
//! * wind output between zero and the available power.
//!
//! The commitment models add binaries `u`, startups `v` and the minimum
//! up/down window inequalities. The stochastic model shares `u` and `v`
//! across scenarios and weights each scenario's dispatch cost by its
//! probability.

mod block;
mod ed;
mod extract;
mod uc;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::solver::SolveStatus;
use crate::system::{BusIndex, System};

pub use ed::{build_ed, EdInputs};
pub use extract::{extract_commitment, extract_dispatch, CostBreakdown, DispatchResult};
pub use uc::{build_suc, build_uc};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormulationError {
    #[error("system is not usable: {0}")]
    BadSystem(String),
    #[error("{device}: expected {expected} values at {resolution_s} s, found {found}")]
    HorizonMismatch { device: String, expected: usize, resolution_s: u32, found: usize },
    #[error("no series supplied for {0}")]
    MissingSeries(String),
    #[error("scenario sets disagree: {0}")]
    ScenarioMismatch(&'static str),
    #[error("{gen}: {detail}")]
    InfeasibleInitialState { gen: String, detail: String },
    #[error("commitment covers {found} units, system has {expected}")]
    CommitmentMissing { expected: usize, found: usize },
    #[error("forecast for {owner} is a copy of a realization")]
    ForecastLeakage { owner: String },
    #[error("solution status {0:?} carries no usable point")]
    StatusNotOptimal(SolveStatus),
    #[error("column {column} = {value} is not integral")]
    NonIntegralBinary { column: String, value: f64 },
    #[error("model has no scenario {0}")]
    NoSuchScenario(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkMode {
    /// DC power flow over the line set.
    Network,
    /// One balance per period; lines ignored.
    CopperPlate,
}

/// Shared inputs of every model builder.
#[derive(Debug, Clone)]
pub struct ModelContext<'a> {
    pub system: &'a System,
    pub buses: BusIndex,
    pub reference: usize,
    /// $/MWh on shed load and on over-generation.
    pub value_of_lost_load: f64,
    pub network: NetworkMode,
}

impl<'a> ModelContext<'a> {
    pub fn new(system: &'a System, value_of_lost_load: f64, network: NetworkMode) -> Result<Self, FormulationError> {
        let buses = system.resolve_buses().map_err(FormulationError::BadSystem)?;
        let reference = system
            .reference_bus()
            .ok_or_else(|| FormulationError::BadSystem("no reference bus".into()))?;
        Ok(ModelContext { system, buses, reference, value_of_lost_load, network })
    }
}

/// Operating state of one thermal unit between model executions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitState {
    /// Hours in the current state: positive while on, negative while off.
    pub hours_in_state: i32,
    /// Output at the end of the last emulated interval; `None` before any
    /// dispatch, which leaves the first ramp unconstrained.
    pub last_dispatch: Option<f64>,
}

impl UnitState {
    pub fn on(&self) -> bool {
        self.hours_in_state > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    /// One entry per thermal unit, in system order.
    pub units: Vec<UnitState>,
}

impl SystemState {
    /// Every unit online long enough to be free to shut down, with no dispatch
    /// history.
    pub fn initial(sys: &System) -> SystemState {
        let units = sys
            .thermal_gens
            .iter()
            .map(|g| UnitState { hours_in_state: g.min_up.max(g.min_down).max(1) as i32, last_dispatch: None })
            .collect();
        SystemState { units }
    }

    pub fn check(&self, sys: &System) -> Result<(), FormulationError> {
        if self.units.len() != sys.thermal_gens.len() {
            return Err(FormulationError::CommitmentMissing { expected: sys.thermal_gens.len(), found: self.units.len() });
        }
        for (u, g) in self.units.iter().zip(&sys.thermal_gens) {
            if u.hours_in_state == 0 {
                return Err(FormulationError::InfeasibleInitialState { gen: g.id.clone(), detail: "hours in state is zero".into() });
            }
            if let Some(p) = u.last_dispatch {
                if !(p.abs() <= g.p_max + 1e-6) {
                    return Err(FormulationError::InfeasibleInitialState {
                        gen: g.id.clone(),
                        detail: alloc::format!("last dispatch {p} exceeds p_max {}", g.p_max),
                    });
                }
            }
        }
        Ok(())
    }
}

/// On/off decisions of a commitment model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitmentSchedule {
    pub gens: Vec<String>,
    /// Start of hour 0, seconds.
    pub start: i64,
    pub horizon_h: u32,
    /// `status[g][t]`.
    pub status: Vec<Vec<bool>>,
    /// `startup[g][t]`: off in `t - 1` (or initially), on in `t`.
    pub startup: Vec<Vec<bool>>,
    /// Taken from an incumbent of a solve stopped by a limit.
    pub from_incumbent: bool,
}

impl CommitmentSchedule {
    /// Status of every unit in hour `t`.
    pub fn hour(&self, t: usize) -> Vec<bool> {
        self.status.iter().map(|s| s[t]).collect()
    }

    /// No-load plus startup cost of the first `hours` hours.
    pub fn commitment_cost(&self, sys: &System, hours: usize) -> (f64, f64) {
        let mut no_load = 0.0;
        let mut startup = 0.0;
        for (g, gen) in sys.thermal_gens.iter().enumerate() {
            for t in 0..hours.min(self.status[g].len()) {
                if self.status[g][t] {
                    no_load += gen.no_load_cost;
                }
                if self.startup[g][t] {
                    startup += gen.startup_cost;
                }
            }
        }
        (no_load, startup)
    }
}

/// Role of a model column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKey {
    Commit { gen: u32, t: u32 },
    Startup { gen: u32, t: u32 },
    Segment { gen: u32, t: u32, seg: u32, scen: u32 },
    Wind { farm: u32, t: u32, scen: u32 },
    Shed { load: u32, t: u32, scen: u32 },
    Surplus { bus: u32, t: u32, scen: u32 },
    Angle { bus: u32, t: u32, scen: u32 },
    Flow { line: u32, t: u32, scen: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    Uc,
    Suc,
    Ed,
}

impl ModelKind {
    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::Uc => "UC",
            ModelKind::Suc => "SUC",
            ModelKind::Ed => "ED",
        }
    }
}

/// Bijection between model columns and their roles, plus what extraction
/// needs to know about the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarMap {
    pub kind: ModelKind,
    pub periods: usize,
    /// Length of one period, seconds.
    pub period_s: u32,
    /// Start of period 0, seconds.
    pub start: i64,
    pub probabilities: Vec<f64>,
    /// Fixed unit status (emulator only).
    pub fixed_status: Option<Vec<bool>>,
    /// Unit status before period 0.
    pub initial_on: Vec<bool>,
    /// Demand `[load][period]`, MW.
    pub load_mw: Vec<Vec<f64>>,
    /// Available wind `[scenario][farm][period]`, MW.
    pub wind_available: Vec<Vec<Vec<f64>>>,
    keys: Vec<VarKey>,
    #[serde(skip)]
    index: BTreeMap<VarKey, usize>,
}

impl VarMap {
    fn new(kind: ModelKind, periods: usize, period_s: u32, start: i64, probabilities: Vec<f64>, initial_on: Vec<bool>) -> Self {
        VarMap {
            kind,
            periods,
            period_s,
            start,
            probabilities,
            fixed_status: None,
            initial_on,
            load_mw: Vec::new(),
            wind_available: Vec::new(),
            keys: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    fn insert(&mut self, key: VarKey, col: usize) {
        debug_assert_eq!(col, self.keys.len());
        self.keys.push(key);
        let fresh = self.index.insert(key, col).is_none();
        debug_assert!(fresh, "duplicate key {key:?}");
    }

    pub fn col(&self, key: VarKey) -> Option<usize> {
        self.index.get(&key).copied()
    }

    pub fn key(&self, col: usize) -> Option<VarKey> {
        self.keys.get(col).copied()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn n_scenarios(&self) -> usize {
        self.probabilities.len()
    }

    /// Rebuilds the reverse index after deserialization.
    pub fn reindex(&mut self) {
        self.index = self.keys.iter().enumerate().map(|(c, k)| (*k, c)).collect();
    }
}

