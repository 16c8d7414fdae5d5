use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::block::{add_period, Output, Period};
use super::{FormulationError, ModelContext, ModelKind, SystemState, VarKey, VarMap};
use crate::series::{ForecastOrigin, ForecastSet, TimeSeries};
use crate::solver::{RowSense, StandardFormMP};

const HOUR_S: u32 = 3600;

fn reject_leaks(sets: &[ForecastSet]) -> Result<(), FormulationError> {
    for set in sets {
        if matches!(set.origin, ForecastOrigin::CopiedRealization { .. }) {
            return Err(FormulationError::ForecastLeakage { owner: set.owner.clone() });
        }
    }
    Ok(())
}

fn check_axis(device: &str, ts: &TimeSeries, horizon: usize) -> Result<(), FormulationError> {
    if ts.resolution_s != HOUR_S || ts.len() != horizon {
        return Err(FormulationError::HorizonMismatch {
            device: device.to_string(),
            expected: horizon,
            resolution_s: HOUR_S,
            found: ts.len(),
        });
    }
    Ok(())
}

/// Matches forecast sets to devices by owner, in device order.
fn by_owner<'s>(sets: &'s [ForecastSet], ids: impl Iterator<Item = &'s str>) -> Result<Vec<&'s ForecastSet>, FormulationError> {
    ids.map(|id| sets.iter().find(|s| s.owner == id).ok_or_else(|| FormulationError::MissingSeries(id.to_string())))
        .collect()
}

/// Deterministic unit commitment over `horizon_h` hours against point
/// forecasts of every wind farm and load.
pub fn build_uc(
    ctx: &ModelContext<'_>,
    wind: &[ForecastSet],
    load: &[ForecastSet],
    state: &SystemState,
    horizon_h: u32,
) -> Result<(StandardFormMP, VarMap), FormulationError> {
    reject_leaks(wind)?;
    if wind.iter().any(|w| !w.is_point()) {
        return Err(FormulationError::ScenarioMismatch("deterministic commitment takes point forecasts"));
    }
    build(ctx, ModelKind::Uc, wind, load, state, horizon_h)
}

/// Two-stage stochastic unit commitment in extensive form.
///
/// Scenario `s` combines member `s` of every wind farm's set; all sets must
/// carry the same probabilities. Loads use their point forecasts.
pub fn build_suc(
    ctx: &ModelContext<'_>,
    wind_scenarios: &[ForecastSet],
    load: &[ForecastSet],
    state: &SystemState,
    horizon_h: u32,
) -> Result<(StandardFormMP, VarMap), FormulationError> {
    reject_leaks(wind_scenarios)?;
    build(ctx, ModelKind::Suc, wind_scenarios, load, state, horizon_h)
}

fn build(
    ctx: &ModelContext<'_>,
    kind: ModelKind,
    wind: &[ForecastSet],
    load: &[ForecastSet],
    state: &SystemState,
    horizon_h: u32,
) -> Result<(StandardFormMP, VarMap), FormulationError> {
    reject_leaks(load)?;
    let sys = ctx.system;
    state.check(sys)?;
    let horizon = horizon_h as usize;
    if horizon == 0 {
        return Err(FormulationError::HorizonMismatch { device: "horizon".into(), expected: 1, resolution_s: HOUR_S, found: 0 });
    }
    let wind = by_owner(wind, sys.renewable_gens.iter().map(|r| r.id.as_str()))?;
    let load = by_owner(load, sys.loads.iter().map(|l| l.id.as_str()))?;
    for set in &load {
        if !set.is_point() {
            return Err(FormulationError::ScenarioMismatch("load forecasts must be point forecasts"));
        }
        check_axis(&set.owner, set.axis(), horizon)?;
    }
    let probabilities: Vec<f64> = match wind.first() {
        Some(first) => first.probabilities.clone(),
        None => vec![1.0],
    };
    for set in &wind {
        set.validate().map_err(|_| FormulationError::ScenarioMismatch("invalid scenario set"))?;
        if set.probabilities != probabilities {
            return Err(FormulationError::ScenarioMismatch("wind farms carry different scenario probabilities"));
        }
        for m in &set.members {
            check_axis(&set.owner, m, horizon)?;
        }
    }
    let start = load
        .first()
        .map(|s| s.axis().start)
        .or_else(|| wind.first().map(|s| s.axis().start))
        .unwrap_or(0);
    let n_scen = probabilities.len();
    let initial_on: Vec<bool> = state.units.iter().map(|u| u.on()).collect();

    let mut mp = StandardFormMP::new();
    let mut vm = VarMap::new(kind, horizon, HOUR_S, start, probabilities.clone(), initial_on.clone());
    vm.load_mw = load.iter().map(|s| s.axis().values.clone()).collect();
    vm.wind_available = (0..n_scen).map(|s| wind.iter().map(|w| w.members[s].values.clone()).collect()).collect();

    // First stage: commitment and startups.
    let mut u = vec![Vec::with_capacity(horizon); sys.thermal_gens.len()];
    let mut v = vec![Vec::with_capacity(horizon); sys.thermal_gens.len()];
    for (g, gen) in sys.thermal_gens.iter().enumerate() {
        let st = state.units[g];
        let h = st.hours_in_state.unsigned_abs() as usize;
        let must_on = if st.on() { (gen.min_up as usize).saturating_sub(h) } else { 0 };
        let must_off = if st.on() { 0 } else { (gen.min_down as usize).saturating_sub(h) };
        if gen.must_run && must_off > 0 {
            return Err(FormulationError::InfeasibleInitialState {
                gen: gen.id.clone(),
                detail: format!(
                    "must run, but has been off {h} h of a {} h minimum down time",
                    gen.min_down
                ),
            });
        }
        for t in 0..horizon {
            let lo = if gen.must_run || t < must_on { 1.0 } else { 0.0 };
            let hi = if t < must_off { 0.0 } else { 1.0 };
            let cost = gen.no_load_cost + gen.min_load_marginal_cost() * gen.p_min;
            let c = mp.add_col(format!("u[{},{t}]", gen.id), lo, hi, cost, true);
            vm.insert(VarKey::Commit { gen: g as u32, t: t as u32 }, c);
            u[g].push(c);
            let c = mp.add_col(format!("v[{},{t}]", gen.id), 0.0, 1.0, gen.startup_cost, false);
            vm.insert(VarKey::Startup { gen: g as u32, t: t as u32 }, c);
            v[g].push(c);
        }
    }
    for (g, gen) in sys.thermal_gens.iter().enumerate() {
        let on0 = if initial_on[g] { 1.0 } else { 0.0 };
        let h = state.units[g].hours_in_state;
        // Status `back` hours before hour 0, assuming the unit was in the
        // opposite state before its current run.
        let prior = |back: usize| -> f64 {
            let back = back as i32;
            if h > 0 {
                if back <= h { 1.0 } else { 0.0 }
            } else if back <= -h {
                0.0
            } else {
                1.0
            }
        };
        for t in 0..horizon {
            let id = &gen.id;
            if t == 0 {
                mp.add_row(format!("startup_def[{id},{t}]"), RowSense::Ge, -on0, &[(v[g][t], 1.0), (u[g][t], -1.0)]);
                mp.add_row(format!("startup_prev[{id},{t}]"), RowSense::Le, 1.0 - on0, &[(v[g][t], 1.0)]);
            } else {
                mp.add_row(
                    format!("startup_def[{id},{t}]"),
                    RowSense::Ge,
                    0.0,
                    &[(v[g][t], 1.0), (u[g][t], -1.0), (u[g][t - 1], 1.0)],
                );
                mp.add_row(format!("startup_prev[{id},{t}]"), RowSense::Le, 1.0, &[(v[g][t], 1.0), (u[g][t - 1], 1.0)]);
            }
            mp.add_row(format!("startup_on[{id},{t}]"), RowSense::Le, 0.0, &[(v[g][t], 1.0), (u[g][t], -1.0)]);
            let up = gen.min_up as usize;
            if up >= 2 {
                let mut terms: Vec<(usize, f64)> = (t.saturating_sub(up - 1)..=t).map(|k| (v[g][k], 1.0)).collect();
                terms.push((u[g][t], -1.0));
                mp.add_row(format!("min_up[{id},{t}]"), RowSense::Le, 0.0, &terms);
            }
            let down = gen.min_down as usize;
            if down >= 2 {
                let mut terms: Vec<(usize, f64)> = (t.saturating_sub(down - 1)..=t).map(|k| (v[g][k], 1.0)).collect();
                let rhs = if t >= down {
                    terms.push((u[g][t - down], 1.0));
                    1.0
                } else {
                    1.0 - prior(down - t)
                };
                mp.add_row(format!("min_down[{id},{t}]"), RowSense::Le, rhs, &terms);
            }
        }
    }

    // Second stage: dispatch per scenario.
    let load_now: Vec<Vec<f64>> = (0..horizon).map(|t| load.iter().map(|s| s.axis().values[t]).collect()).collect();
    for (s, &prob) in probabilities.iter().enumerate() {
        let mut prev_seg: Vec<Vec<usize>> = vec![Vec::new(); sys.thermal_gens.len()];
        for t in 0..horizon {
            let mut outputs = Vec::with_capacity(sys.thermal_gens.len());
            for (g, gen) in sys.thermal_gens.iter().enumerate() {
                let id = &gen.id;
                let mut segs = Vec::new();
                for (k, (width, mc)) in gen.segments().enumerate() {
                    let c = mp.add_col(format!("seg[{id},{t},{k},s{s}]"), 0.0, width, prob * mc, false);
                    vm.insert(VarKey::Segment { gen: g as u32, t: t as u32, seg: k as u32, scen: s as u32 }, c);
                    segs.push(c);
                }
                if !segs.is_empty() {
                    let mut terms: Vec<(usize, f64)> = segs.iter().map(|&c| (c, 1.0)).collect();
                    terms.push((u[g][t], -(gen.p_max - gen.p_min)));
                    mp.add_row(format!("capacity[{id},{t},s{s}]"), RowSense::Le, 0.0, &terms);
                }
                add_ramps(&mut mp, gen, g, t, s, &u, &v, &segs, &prev_seg[g], initial_on[g], state.units[g].last_dispatch);
                let mut terms = vec![(u[g][t], gen.p_min)];
                terms.extend(segs.iter().map(|&c| (c, 1.0)));
                outputs.push(Output { constant: 0.0, terms });
                prev_seg[g] = segs;
            }
            let wind_now: Vec<f64> = wind.iter().map(|w| w.members[s].values[t]).collect();
            add_period(
                &mut mp,
                &mut vm,
                ctx,
                &Period { t, scen: s, weight: prob, wind: &wind_now, load: &load_now[t], outputs: &outputs },
            );
        }
    }
    Ok((mp, vm))
}

/// Hourly ramp limits between `t - 1` and `t`. A unit may start up to
/// `max(p_min, ramp)` and must be at or below that level in the hour before
/// it shuts down.
#[allow(clippy::too_many_arguments)]
fn add_ramps(
    mp: &mut StandardFormMP,
    gen: &crate::system::ThermalGen,
    g: usize,
    t: usize,
    s: usize,
    u: &[Vec<usize>],
    v: &[Vec<usize>],
    segs: &[usize],
    prev_segs: &[usize],
    initially_on: bool,
    last_dispatch: Option<f64>,
) {
    let (r_up, r_down) = (gen.ramp_up, gen.ramp_down);
    let id = &gen.id;
    let prev_known = t > 0 || last_dispatch.is_some();
    if !prev_known {
        return;
    }
    let output = |terms: &mut Vec<(usize, f64)>, t: usize, segs: &[usize], sign: f64| {
        terms.push((u[g][t], sign * gen.p_min));
        terms.extend(segs.iter().map(|&c| (c, sign)));
    };
    let p_prev = last_dispatch.unwrap_or(0.0).max(0.0);
    let on_prev = if initially_on { 1.0 } else { 0.0 };
    if r_up < gen.p_max {
        let slack = (gen.p_min - r_up).max(0.0);
        let mut terms = Vec::new();
        output(&mut terms, t, segs, 1.0);
        let mut rhs = r_up;
        if t > 0 {
            output(&mut terms, t - 1, prev_segs, -1.0);
        } else {
            rhs += p_prev;
        }
        terms.push((v[g][t], -slack));
        mp.add_row(format!("ramp_up[{id},{t},s{s}]"), RowSense::Le, rhs, &terms);
    }
    if r_down < gen.p_max {
        let slack = (gen.p_min - r_down).max(0.0);
        // p_{t-1} - p_t - slack * (v_t - u_t + u_{t-1}) <= r_down
        let mut terms = Vec::new();
        output(&mut terms, t, segs, -1.0);
        let mut rhs = r_down;
        if t > 0 {
            output(&mut terms, t - 1, prev_segs, 1.0);
            terms.push((u[g][t - 1], -slack));
        } else {
            rhs -= p_prev;
            rhs += slack * on_prev;
        }
        terms.push((v[g][t], -slack));
        terms.push((u[g][t], slack));
        mp.add_row(format!("ramp_down[{id},{t},s{s}]"), RowSense::Le, rhs, &terms);
    }
}
