use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{CommitmentSchedule, FormulationError, ModelContext, ModelKind, NetworkMode, VarKey, VarMap};
use crate::solver::{SolveStatus, Solution};

/// Distance from an integer that still counts as integral.
pub const BINARY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub no_load: f64,
    pub startup: f64,
    pub variable: f64,
    pub shed_penalty: f64,
    pub surplus_penalty: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.no_load + self.startup + self.variable + self.shed_penalty + self.surplus_penalty
    }
}

/// Physical dispatch of one scenario of a solved model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchResult {
    /// Start of period 0, seconds.
    pub start: i64,
    pub step_s: u32,
    /// `[unit][period]`, MW.
    pub thermal_mw: Vec<Vec<f64>>,
    /// `[farm][period]`, MW.
    pub wind_mw: Vec<Vec<f64>>,
    /// `[farm][period]`, MW.
    pub wind_available_mw: Vec<Vec<f64>>,
    /// `[load][period]`, MW.
    pub load_mw: Vec<Vec<f64>>,
    /// `[load][period]`, MW.
    pub shed_mw: Vec<Vec<f64>>,
    /// Over-generation `[bus][period]`, MW.
    pub surplus_mw: Vec<Vec<f64>>,
    /// `[line][period]`, MW; empty in copper-plate mode.
    pub flow_mw: Vec<Vec<f64>>,
    /// Costs recomputed from the quantities above.
    pub costs: CostBreakdown,
}

impl DispatchResult {
    pub fn periods(&self) -> usize {
        self.load_mw.first().or(self.thermal_mw.first()).map_or(0, |v| v.len())
    }

    /// Energy not supplied, MWh.
    pub fn ens_mwh(&self) -> f64 {
        self.shed_mw.iter().flatten().sum::<f64>() * f64::from(self.step_s) / 3600.0
    }

    /// Largest absolute nodal imbalance over all buses and periods, MW.
    pub fn max_balance_residual(&self, ctx: &ModelContext<'_>) -> f64 {
        let sys = ctx.system;
        let n_bus = sys.buses.len();
        let mut worst: f64 = 0.0;
        for t in 0..self.periods() {
            let mut bal = vec![0.0; n_bus];
            for (g, p) in self.thermal_mw.iter().enumerate() {
                bal[ctx.buses.thermal[g]] += p[t];
            }
            for (w, p) in self.wind_mw.iter().enumerate() {
                bal[ctx.buses.renewable[w]] += p[t];
            }
            for (l, d) in self.load_mw.iter().enumerate() {
                bal[ctx.buses.load[l]] += self.shed_mw[l][t] - d[t];
            }
            for (b, s) in self.surplus_mw.iter().enumerate() {
                bal[b] -= s[t];
            }
            if self.flow_mw.is_empty() {
                worst = worst.max(bal.iter().sum::<f64>().abs());
            } else {
                for (k, f) in self.flow_mw.iter().enumerate() {
                    bal[ctx.buses.line_from[k]] -= f[t];
                    bal[ctx.buses.line_to[k]] += f[t];
                }
                worst = bal.iter().fold(worst, |w, b| w.max(b.abs()));
            }
        }
        worst
    }
}

fn usable(sol: &Solution) -> Result<bool, FormulationError> {
    match sol.status {
        SolveStatus::Optimal if sol.has_primal() => Ok(false),
        SolveStatus::TimeLimit | SolveStatus::NodeLimit if sol.has_primal() => Ok(true),
        s => Err(FormulationError::StatusNotOptimal(s)),
    }
}

fn binary(sol: &Solution, vm: &VarMap, key: VarKey, names: &impl Fn(usize) -> alloc::string::String) -> Result<bool, FormulationError> {
    let c = vm.col(key).expect("commitment column registered");
    let x = sol.primal[c];
    let r = libm::round(x);
    if (x - r).abs() > BINARY_TOL || !(r == 0.0 || r == 1.0) {
        return Err(FormulationError::NonIntegralBinary { column: names(c), value: x });
    }
    Ok(r == 1.0)
}

/// On/off schedule of a solved commitment model. Binaries within
/// [`BINARY_TOL`] of 0 or 1 are rounded; startups are recomputed from the
/// rounded statuses.
pub fn extract_commitment(sol: &Solution, vm: &VarMap, ctx: &ModelContext<'_>) -> Result<CommitmentSchedule, FormulationError> {
    let from_incumbent = usable(sol)?;
    let sys = ctx.system;
    let names = |c: usize| alloc::format!("{:?}", vm.key(c));
    let mut status = Vec::with_capacity(sys.thermal_gens.len());
    let mut startup = Vec::with_capacity(sys.thermal_gens.len());
    for g in 0..sys.thermal_gens.len() {
        let mut st = Vec::with_capacity(vm.periods);
        let mut su = Vec::with_capacity(vm.periods);
        let mut prev = vm.initial_on[g];
        for t in 0..vm.periods {
            let on = match &vm.fixed_status {
                Some(fixed) => fixed[g],
                None => binary(sol, vm, VarKey::Commit { gen: g as u32, t: t as u32 }, &names)?,
            };
            su.push(on && !prev);
            st.push(on);
            prev = on;
        }
        status.push(st);
        startup.push(su);
    }
    Ok(CommitmentSchedule {
        gens: sys.thermal_gens.iter().map(|g| g.id.clone()).collect(),
        start: vm.start,
        horizon_h: (vm.periods as u64 * u64::from(vm.period_s) / 3600) as u32,
        status,
        startup,
        from_incumbent,
    })
}

/// Dispatch of scenario `scen` with every cost component recomputed from the
/// primal quantities and the system data.
///
/// For commitment models the no-load and startup costs of the schedule are
/// included, so the probability-weighted sum of scenario totals equals the
/// model objective. Emulator results carry no commitment costs.
pub fn extract_dispatch(
    sol: &Solution,
    vm: &VarMap,
    ctx: &ModelContext<'_>,
    scen: usize,
) -> Result<DispatchResult, FormulationError> {
    usable(sol)?;
    if scen >= vm.n_scenarios() {
        return Err(FormulationError::NoSuchScenario(scen));
    }
    let sys = ctx.system;
    let s = scen as u32;
    let n = vm.periods;
    let x = |key: VarKey| vm.col(key).map_or(0.0, |c| sol.primal[c]);
    let schedule = extract_commitment(sol, vm, ctx)?;
    let hours = f64::from(vm.period_s) / 3600.0;
    let mut costs = CostBreakdown::default();

    let mut thermal_mw = Vec::with_capacity(sys.thermal_gens.len());
    for (g, gen) in sys.thermal_gens.iter().enumerate() {
        let mut row = Vec::with_capacity(n);
        for t in 0..n {
            let on = schedule.status[g][t];
            let mut p = if on { gen.p_min } else { 0.0 };
            for k in 0..gen.segments().count() {
                p += x(VarKey::Segment { gen: g as u32, t: t as u32, seg: k as u32, scen: s });
            }
            costs.variable += gen.variable_cost_rate(p) * hours;
            if vm.kind != ModelKind::Ed {
                if on {
                    costs.no_load += gen.no_load_cost * hours;
                }
                if schedule.startup[g][t] {
                    costs.startup += gen.startup_cost;
                }
            }
            row.push(p);
        }
        thermal_mw.push(row);
    }
    let series = |count: usize, key: &dyn Fn(u32, u32) -> VarKey| -> Vec<Vec<f64>> {
        (0..count).map(|i| (0..n).map(|t| x(key(i as u32, t as u32))).collect()).collect()
    };
    let wind_mw = series(sys.renewable_gens.len(), &|farm, t| VarKey::Wind { farm, t, scen: s });
    let shed_mw = series(sys.loads.len(), &|load, t| VarKey::Shed { load, t, scen: s });
    let surplus_mw = series(sys.buses.len(), &|bus, t| VarKey::Surplus { bus, t, scen: s });
    let flow_mw = match ctx.network {
        NetworkMode::Network => series(sys.lines.len(), &|line, t| VarKey::Flow { line, t, scen: s }),
        NetworkMode::CopperPlate => Vec::new(),
    };
    let voll = ctx.value_of_lost_load;
    costs.shed_penalty = voll * shed_mw.iter().flatten().sum::<f64>() * hours;
    costs.surplus_penalty = voll * surplus_mw.iter().flatten().sum::<f64>() * hours;
    Ok(DispatchResult {
        start: vm.start,
        step_s: vm.period_s,
        thermal_mw,
        wind_mw,
        wind_available_mw: vm.wind_available[scen].clone(),
        load_mw: vm.load_mw.clone(),
        shed_mw,
        surplus_mw,
        flow_mw,
        costs,
    })
}
