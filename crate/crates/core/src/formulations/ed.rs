use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::block::{add_period, Output, Period};
use super::{FormulationError, ModelContext, ModelKind, SystemState, VarKey, VarMap};
use crate::series::RealizationSeries;
use crate::solver::{RowSense, StandardFormMP};

/// Realized data and fixed commitment for one emulator execution.
#[derive(Debug, Clone, Copy)]
pub struct EdInputs<'b> {
    /// One series per wind farm, covering exactly the emulated steps.
    pub wind: &'b [RealizationSeries],
    /// One series per load, covering exactly the emulated steps.
    pub load: &'b [RealizationSeries],
    /// On/off per thermal unit for the whole execution.
    pub status: &'b [bool],
}

fn by_owner<'s>(series: &'s [RealizationSeries], id: &str) -> Result<&'s RealizationSeries, FormulationError> {
    series.iter().find(|s| s.owner == id).ok_or_else(|| FormulationError::MissingSeries(id.to_string()))
}

/// Economic dispatch over `n_steps` steps of `step_s` seconds with the unit
/// status fixed. Ramp limits scale with the step length; commitment costs are
/// left out.
pub fn build_ed(
    ctx: &ModelContext<'_>,
    inputs: &EdInputs<'_>,
    state: &SystemState,
    n_steps: usize,
    step_s: u32,
) -> Result<(StandardFormMP, VarMap), FormulationError> {
    let sys = ctx.system;
    state.check(sys)?;
    if inputs.status.len() != sys.thermal_gens.len() {
        return Err(FormulationError::CommitmentMissing { expected: sys.thermal_gens.len(), found: inputs.status.len() });
    }
    let check = |s: &RealizationSeries| {
        if s.series.resolution_s != step_s || s.series.len() != n_steps {
            Err(FormulationError::HorizonMismatch {
                device: s.owner.clone(),
                expected: n_steps,
                resolution_s: step_s,
                found: s.series.len(),
            })
        } else {
            Ok(())
        }
    };
    let wind: Vec<&RealizationSeries> =
        sys.renewable_gens.iter().map(|r| by_owner(inputs.wind, &r.id)).collect::<Result<_, _>>()?;
    let load: Vec<&RealizationSeries> = sys.loads.iter().map(|l| by_owner(inputs.load, &l.id)).collect::<Result<_, _>>()?;
    for s in wind.iter().chain(&load) {
        check(s)?;
    }
    let start = load.first().or(wind.first()).map_or(0, |s| s.series.start);
    let hours = f64::from(step_s) / 3600.0;
    let initial_on: Vec<bool> = state.units.iter().map(|u| u.on()).collect();

    let mut mp = StandardFormMP::new();
    let mut vm = VarMap::new(ModelKind::Ed, n_steps, step_s, start, vec![1.0], initial_on);
    vm.fixed_status = Some(inputs.status.to_vec());
    vm.load_mw = load.iter().map(|s| s.series.values.clone()).collect();
    vm.wind_available = vec![wind.iter().map(|s| s.series.values.clone()).collect()];

    let mut prev: Vec<Vec<usize>> = vec![Vec::new(); sys.thermal_gens.len()];
    for t in 0..n_steps {
        let mut outputs = Vec::with_capacity(sys.thermal_gens.len());
        for (g, gen) in sys.thermal_gens.iter().enumerate() {
            let id = &gen.id;
            if !inputs.status[g] {
                outputs.push(Output { constant: 0.0, terms: Vec::new() });
                continue;
            }
            mp.objective_offset += gen.min_load_marginal_cost() * gen.p_min * hours;
            let segs: Vec<usize> = gen
                .segments()
                .enumerate()
                .map(|(k, (width, mc))| {
                    let c = mp.add_col(format!("seg[{id},{t},{k},s0]"), 0.0, width, mc * hours, false);
                    vm.insert(VarKey::Segment { gen: g as u32, t: t as u32, seg: k as u32, scen: 0 }, c);
                    c
                })
                .collect();
            let range = gen.p_max - gen.p_min;
            let up = gen.ramp_up * hours;
            let down = gen.ramp_down * hours;
            let terms = |sign: f64| segs.iter().map(move |&c| (c, sign));
            if t > 0 {
                if up < range {
                    let row: Vec<(usize, f64)> = terms(1.0).chain(prev[g].iter().map(|&c| (c, -1.0))).collect();
                    mp.add_row(format!("ramp_up[{id},{t},s0]"), RowSense::Le, up, &row);
                }
                if down < range {
                    let row: Vec<(usize, f64)> = terms(-1.0).chain(prev[g].iter().map(|&c| (c, 1.0))).collect();
                    mp.add_row(format!("ramp_down[{id},{t},s0]"), RowSense::Le, down, &row);
                }
            } else if let (true, Some(p_prev)) = (state.units[g].on(), state.units[g].last_dispatch) {
                // Continuity with the previous execution; skipped when the unit
                // has just started.
                let above_min = (p_prev - gen.p_min).max(0.0);
                if above_min + up < range {
                    let row: Vec<(usize, f64)> = terms(1.0).collect();
                    mp.add_row(format!("ramp_up[{id},{t},s0]"), RowSense::Le, above_min + up, &row);
                }
                if above_min - down > 0.0 {
                    let row: Vec<(usize, f64)> = terms(1.0).collect();
                    mp.add_row(format!("ramp_down[{id},{t},s0]"), RowSense::Ge, above_min - down, &row);
                }
            }
            outputs.push(Output { constant: gen.p_min, terms: terms(1.0).collect() });
            prev[g] = segs;
        }
        let wind_now: Vec<f64> = wind.iter().map(|s| s.series.values[t]).collect();
        let load_now: Vec<f64> = load.iter().map(|s| s.series.values[t]).collect();
        add_period(
            &mut mp,
            &mut vm,
            ctx,
            &Period { t, scen: 0, weight: hours, wind: &wind_now, load: &load_now, outputs: &outputs },
        );
    }
    Ok((mp, vm))
}
