//! Constraints shared by every dispatch period: balance, slacks, wind and DC
//! flows.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{ModelContext, NetworkMode, VarKey, VarMap};
use crate::solver::{RowSense, StandardFormMP};

/// Output of one unit in one period: `constant + sum(coef * column)`.
pub(super) struct Output {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

pub(super) struct Period<'b> {
    pub t: usize,
    pub scen: usize,
    /// Cost multiplier for MW in this period: probability times hours.
    pub weight: f64,
    /// Available power per wind farm, MW.
    pub wind: &'b [f64],
    /// Demand per load, MW.
    pub load: &'b [f64],
    pub outputs: &'b [Output],
}

fn key(t: usize, scen: usize) -> (u32, u32) {
    (t as u32, scen as u32)
}

pub(super) fn add_period(mp: &mut StandardFormMP, vm: &mut VarMap, ctx: &ModelContext<'_>, d: &Period<'_>) {
    let sys = ctx.system;
    let (t, scen) = key(d.t, d.scen);
    let tag = |id: &str| format!("{id},{},s{}", d.t, d.scen);
    let voll = ctx.value_of_lost_load * d.weight;
    let n_bus = sys.buses.len();
    let copper = ctx.network == NetworkMode::CopperPlate;
    let balance_of = |bus: usize| if copper { 0 } else { bus };
    let n_bal = if copper { 1 } else { n_bus };
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_bal];
    let mut rhs = vec![0.0; n_bal];

    for (g, out) in d.outputs.iter().enumerate() {
        let b = balance_of(ctx.buses.thermal[g]);
        rows[b].extend_from_slice(&out.terms);
        rhs[b] -= out.constant;
    }
    for (w, farm) in sys.renewable_gens.iter().enumerate() {
        let c = mp.add_col(format!("wind[{}]", tag(&farm.id)), 0.0, d.wind[w].max(0.0), 0.0, false);
        vm.insert(VarKey::Wind { farm: w as u32, t, scen }, c);
        rows[balance_of(ctx.buses.renewable[w])].push((c, 1.0));
    }
    for (l, load) in sys.loads.iter().enumerate() {
        let c = mp.add_col(format!("shed[{}]", tag(&load.id)), 0.0, d.load[l].max(0.0), voll, false);
        vm.insert(VarKey::Shed { load: l as u32, t, scen }, c);
        let b = balance_of(ctx.buses.load[l]);
        rows[b].push((c, 1.0));
        rhs[b] += d.load[l];
    }
    for b in 0..n_bal {
        let bus = if copper { ctx.reference } else { b };
        let c = mp.add_col(format!("surplus[{}]", tag(&sys.buses[bus].id)), 0.0, f64::INFINITY, voll, false);
        vm.insert(VarKey::Surplus { bus: bus as u32, t, scen }, c);
        rows[b].push((c, -1.0));
    }
    if !copper {
        let mut angle = vec![None; n_bus];
        for (b, bus) in sys.buses.iter().enumerate() {
            if b != ctx.reference {
                let c = mp.add_col(format!("angle[{}]", tag(&bus.id)), f64::NEG_INFINITY, f64::INFINITY, 0.0, false);
                vm.insert(VarKey::Angle { bus: b as u32, t, scen }, c);
                angle[b] = Some(c);
            }
        }
        for (k, line) in sys.lines.iter().enumerate() {
            let lim = line.flow_limit;
            let c = mp.add_col(format!("flow[{}]", tag(&line.id)), -lim, lim, 0.0, false);
            vm.insert(VarKey::Flow { line: k as u32, t, scen }, c);
            let (f, to) = (ctx.buses.line_from[k], ctx.buses.line_to[k]);
            let coef = sys.base_power * line.susceptance;
            let mut def = vec![(c, 1.0)];
            if let Some(a) = angle[f] {
                def.push((a, -coef));
            }
            if let Some(a) = angle[to] {
                def.push((a, coef));
            }
            mp.add_row(format!("flow_def[{}]", tag(&line.id)), RowSense::Eq, 0.0, &def);
            rows[f].push((c, -1.0));
            rows[to].push((c, 1.0));
        }
    }
    for (b, terms) in rows.iter().enumerate() {
        let name = if copper { format!("balance[{}]", tag("system")) } else { format!("balance[{}]", tag(&sys.buses[b].id)) };
        mp.add_row(name, RowSense::Eq, rhs[b], terms);
    }
}
