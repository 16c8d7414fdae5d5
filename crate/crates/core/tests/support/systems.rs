//! Small random systems shared by the formulation tests and the acceptance
//! checks.

#![allow(dead_code)]

use opsim_core::formulations::{build_suc, build_uc, extract_commitment, ModelContext, NetworkMode, SystemState, UnitState, VarKey};
use opsim_core::series::ForecastOrigin;
use opsim_core::system::{Bus, CostSegment, Line, Load, RenewableGen, ThermalGen};
use opsim_core::{solve_milp, ForecastSet, Prng, Solution, SolveStatus, SolverSettings, StandardFormMP, System, TimeSeries};

pub const VOLL: f64 = 10_000.0;

pub fn settings() -> SolverSettings {
    SolverSettings { mip_gap: 1e-9, ..SolverSettings::default() }
}

pub fn unit(id: &str, bus: &str, p_min: f64, p_max: f64, mc: f64) -> ThermalGen {
    ThermalGen {
        id: id.into(),
        bus: bus.into(),
        p_min,
        p_max,
        ramp_up: p_max,
        ramp_down: p_max,
        min_up: 1,
        min_down: 1,
        startup_cost: 0.0,
        no_load_cost: 0.0,
        cost_curve: vec![CostSegment { breakpoint: p_max, marginal_cost: mc }],
        must_run: false,
    }
}

pub fn hourly(owner: &str, values: Vec<f64>) -> ForecastSet {
    ForecastSet::point(owner, ForecastOrigin::External, TimeSeries::new(0, 3600, values).unwrap())
}

pub fn state(hours: &[i32]) -> SystemState {
    SystemState { units: hours.iter().map(|&h| UnitState { hours_in_state: h, last_dispatch: None }).collect() }
}

pub fn solve(mp: &StandardFormMP) -> Solution {
    let sol = solve_milp(mp, &settings()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    sol
}

/// Three-bus system with two lines, random units, one wind farm and one load.
pub fn random_system(rng: &mut Prng) -> System {
    let mut gens = Vec::new();
    let n = 2 + (rng.next_u64() % 2) as usize;
    for g in 0..n {
        let p_max = 40.0 + (rng.next_u64() % 60) as f64;
        let p_min = (rng.next_u64() % 20) as f64;
        let mc = 10.0 + (rng.next_u64() % 40) as f64;
        let bus = ["b1", "b2", "b3"][g % 3];
        let mut u = unit(&format!("g{g}"), bus, p_min, p_max, mc);
        u.cost_curve = vec![
            CostSegment { breakpoint: p_min + (p_max - p_min) / 2.0, marginal_cost: mc },
            CostSegment { breakpoint: p_max, marginal_cost: mc + 5.0 },
        ];
        u.min_up = 1 + (rng.next_u64() % 3) as u32;
        u.min_down = 1 + (rng.next_u64() % 3) as u32;
        u.ramp_up = 20.0 + (rng.next_u64() % 60) as f64;
        u.ramp_down = u.ramp_up;
        u.startup_cost = (rng.next_u64() % 200) as f64;
        u.no_load_cost = (rng.next_u64() % 50) as f64;
        gens.push(u);
    }
    let line = |id: &str, from: &str, to: &str, limit: f64| Line {
        id: id.into(),
        from_bus: from.into(),
        to_bus: to.into(),
        susceptance: 10.0,
        flow_limit: limit,
    };
    System {
        name: "random".into(),
        base_power: 100.0,
        buses: vec![
            Bus { id: "b1".into(), reference: true },
            Bus { id: "b2".into(), reference: false },
            Bus { id: "b3".into(), reference: false },
        ],
        lines: vec![line("l12", "b1", "b2", 30.0 + (rng.next_u64() % 40) as f64), line("l23", "b2", "b3", 40.0)],
        thermal_gens: gens,
        renewable_gens: vec![RenewableGen { id: "w1".into(), bus: "b2".into(), installed_capacity: 50.0, profile: "w".into() }],
        loads: vec![Load { id: "d1".into(), bus: "b3".into(), peak: 120.0, profile: "d".into() }],
    }
}

pub struct Case {
    pub sys: System,
    pub wind: Vec<f64>,
    pub load: Vec<f64>,
    pub state: SystemState,
}

pub fn random_case(seed: u64, hours: usize) -> Case {
    let mut rng = Prng::new(seed);
    let sys = random_system(&mut rng);
    let wind = (0..hours).map(|_| rng.next_uniform() * 50.0).collect();
    let load = (0..hours).map(|_| 40.0 + rng.next_uniform() * 80.0).collect();
    let hours_in_state = sys.thermal_gens.iter().map(|_| if rng.next_uniform() < 0.5 { 1 } else { -1 }).collect::<Vec<_>>();
    Case { state: state(&hours_in_state), sys, wind, load }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(1.0)
}

/// Checks that a one-scenario SUC, a two-copy SUC and the UC agree on a
/// random six-hour case, and that the SUC commitment is optimal for the UC.
pub fn collapse_check(seed: u64) -> Result<(), String> {
    let case = random_case(seed, 6);
    let ctx = ModelContext::new(&case.sys, VOLL, NetworkMode::Network).map_err(|e| e.to_string())?;
    let load = [hourly("d1", case.load.clone())];
    let (uc, uc_map) = build_uc(&ctx, &[hourly("w1", case.wind.clone())], &load, &case.state, 6).map_err(|e| e.to_string())?;
    let a = solve(&uc).objective.unwrap();

    let series = TimeSeries::new(0, 3600, case.wind.clone()).unwrap();
    let one = ForecastSet::scenarios("w1", ForecastOrigin::External, vec![series.clone()], vec![1.0]).unwrap();
    let (suc, suc_map) = build_suc(&ctx, &[one], &load, &case.state, 6).map_err(|e| e.to_string())?;
    let suc_sol = solve(&suc);
    let b = suc_sol.objective.unwrap();
    if !close(a, b) {
        return Err(format!("seed {seed}: UC {a} vs one-scenario SUC {b}"));
    }

    let schedule = extract_commitment(&suc_sol, &suc_map, &ctx).map_err(|e| e.to_string())?;
    let mut fixed = uc.clone();
    for (g, row) in schedule.status.iter().enumerate() {
        for (t, &on) in row.iter().enumerate() {
            let c = uc_map.col(VarKey::Commit { gen: g as u32, t: t as u32 }).unwrap();
            fixed.col_lower[c] = f64::from(u8::from(on));
            fixed.col_upper[c] = fixed.col_lower[c];
        }
    }
    let refixed = solve(&fixed).objective.unwrap();
    if !close(a, refixed) {
        return Err(format!("seed {seed}: UC {a} vs UC under the SUC commitment {refixed}"));
    }

    let two = ForecastSet::scenarios("w1", ForecastOrigin::External, vec![series.clone(), series], vec![0.5, 0.5]).unwrap();
    let (dup, _) = build_suc(&ctx, &[two], &load, &case.state, 6).map_err(|e| e.to_string())?;
    let c = solve(&dup).objective.unwrap();
    if !close(a, c) {
        return Err(format!("seed {seed}: UC {a} vs duplicated-scenario SUC {c}"));
    }
    Ok(())
}
