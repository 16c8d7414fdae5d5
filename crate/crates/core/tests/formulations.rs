mod support;

use opsim_core::formulations::{
    build_ed, build_suc, build_uc, extract_commitment, extract_dispatch, EdInputs, FormulationError, ModelContext,
    NetworkMode, VarKey, VarMap,
};
use opsim_core::series::ForecastOrigin;
use opsim_core::solver::RowSense;
use opsim_core::system::{Bus, Load, RenewableGen, ThermalGen};
use opsim_core::{solve_lp, ForecastSet, RealizationSeries, Solution, SolveStatus, StandardFormMP, System, TimeSeries};

use support::systems::{collapse_check, hourly, random_case, settings, solve, state, unit, VOLL};

fn single_bus(gens: Vec<ThermalGen>, wind: bool) -> System {
    System {
        name: "one-bus".into(),
        base_power: 100.0,
        buses: vec![Bus { id: "b1".into(), reference: true }],
        lines: vec![],
        thermal_gens: gens,
        renewable_gens: if wind {
            vec![RenewableGen { id: "w1".into(), bus: "b1".into(), installed_capacity: 200.0, profile: "wind".into() }]
        } else {
            vec![]
        },
        loads: vec![Load { id: "d1".into(), bus: "b1".into(), peak: 200.0, profile: "load".into() }],
    }
}

/// Row activities evaluated straight from the triplets; largest violation of
/// any named row or column bound.
fn max_violation(mp: &StandardFormMP, x: &[f64]) -> f64 {
    let mut act = vec![0.0; mp.rhs.len()];
    for &(i, j, a) in &mp.triplets {
        act[i] += a * x[j];
    }
    let mut worst: f64 = 0.0;
    for (i, a) in act.iter().enumerate() {
        assert!(!mp.row_names[i].is_empty());
        let v = match mp.row_sense[i] {
            RowSense::Le => a - mp.rhs[i],
            RowSense::Ge => mp.rhs[i] - a,
            RowSense::Eq => (a - mp.rhs[i]).abs(),
        };
        worst = worst.max(v);
    }
    for (j, v) in x.iter().enumerate() {
        worst = worst.max(mp.col_lower[j] - v).max(v - mp.col_upper[j]);
    }
    worst
}

fn example_605() -> System {
    let mut g = unit("g1", "b1", 10.0, 50.0, 20.0);
    g.no_load_cost = 5.0;
    single_bus(vec![g], false)
}

#[test]
fn single_unit_commits_at_605() {
    let sys = example_605();
    let ctx = ModelContext::new(&sys, VOLL, NetworkMode::Network).unwrap();
    let (mp, vm) = build_uc(&ctx, &[], &[hourly("d1", vec![30.0])], &state(&[-1]), 1).unwrap();
    let sol = solve(&mp);
    assert!((sol.objective.unwrap() - 605.0).abs() < 1e-6);

    // Enumerate the commitment and solve each LP.
    let oracle = [0.0, 1.0]
        .iter()
        .map(|&u| {
            let mut fixed = mp.clone();
            let c = vm.col(VarKey::Commit { gen: 0, t: 0 }).unwrap();
            fixed.col_lower[c] = u;
            fixed.col_upper[c] = u;
            fixed.integer.iter_mut().for_each(|i| *i = false);
            solve_lp(&fixed, &settings()).unwrap().objective.unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    assert!((oracle - 605.0).abs() < 1e-6);

    let schedule = extract_commitment(&sol, &vm, &ctx).unwrap();
    assert_eq!(schedule.status, vec![vec![true]]);
    assert_eq!(schedule.startup, vec![vec![true]]);
    let dispatch = extract_dispatch(&sol, &vm, &ctx, 0).unwrap();
    assert!((dispatch.thermal_mw[0][0] - 30.0).abs() < 1e-9);
    assert!((dispatch.costs.total() - sol.objective.unwrap()).abs() <= 1e-6 * 605.0);
}

#[test]
fn zero_load_leaves_units_off() {
    let mut a = unit("g1", "b1", 10.0, 50.0, 20.0);
    a.startup_cost = 100.0;
    let mut b = unit("g2", "b1", 5.0, 40.0, 30.0);
    b.startup_cost = 50.0;
    let sys = single_bus(vec![a, b], false);
    let ctx = ModelContext::new(&sys, VOLL, NetworkMode::Network).unwrap();
    let (mp, vm) = build_uc(&ctx, &[], &[hourly("d1", vec![0.0; 4])], &state(&[-3, -3]), 4).unwrap();
    let sol = solve(&mp);
    assert!(sol.objective.unwrap().abs() < 1e-9);
    let schedule = extract_commitment(&sol, &vm, &ctx).unwrap();
    assert!(schedule.status.iter().flatten().all(|on| !on));
}

#[test]
fn must_run_inside_minimum_down_time_is_rejected() {
    let mut g = unit("g1", "b1", 10.0, 50.0, 20.0);
    g.min_down = 3;
    g.must_run = true;
    let sys = single_bus(vec![g], false);
    let ctx = ModelContext::new(&sys, VOLL, NetworkMode::Network).unwrap();
    let err = build_uc(&ctx, &[], &[hourly("d1", vec![30.0; 4])], &state(&[-1]), 4).unwrap_err();
    assert!(matches!(err, FormulationError::InfeasibleInitialState { ref gen, .. } if gen == "g1"));
}

#[test]
fn minimum_down_time_holds_unit_off() {
    let mut g = unit("g1", "b1", 10.0, 50.0, 20.0);
    g.min_down = 3;
    let sys = single_bus(vec![g], false);
    let ctx = ModelContext::new(&sys, VOLL, NetworkMode::Network).unwrap();
    let (mp, vm) = build_uc(&ctx, &[], &[hourly("d1", vec![30.0; 4])], &state(&[-1]), 4).unwrap();
    let sol = solve(&mp);
    let schedule = extract_commitment(&sol, &vm, &ctx).unwrap();
    assert_eq!(schedule.status[0], vec![false, false, true, true]);
}

#[test]
fn extraction_rounds_within_tolerance_only() {
    let sys = example_605();
    let ctx = ModelContext::new(&sys, VOLL, NetworkMode::Network).unwrap();
    let (mp, vm) = build_uc(&ctx, &[], &[hourly("d1", vec![30.0])], &state(&[-1]), 1).unwrap();
    let mut sol = solve(&mp);
    let c = vm.col(VarKey::Commit { gen: 0, t: 0 }).unwrap();
    sol.primal[c] = 0.9999999;
    assert_eq!(extract_commitment(&sol, &vm, &ctx).unwrap().status, vec![vec![true]]);
    sol.primal[c] = 0.4;
    assert!(matches!(extract_commitment(&sol, &vm, &ctx), Err(FormulationError::NonIntegralBinary { .. })));
    sol.status = SolveStatus::Infeasible;
    sol.primal.clear();
    assert!(matches!(extract_commitment(&sol, &vm, &ctx), Err(FormulationError::StatusNotOptimal(_))));
}

fn step(owner: &str, values: Vec<f64>) -> RealizationSeries {
    RealizationSeries::new(owner, TimeSeries::new(0, 300, values).unwrap())
}

#[test]
fn uncommitted_system_sheds_everything() {
    let sys = single_bus(vec![unit("g1", "b1", 10.0, 50.0, 20.0)], false);
    let ctx = ModelContext::new(&sys, VOLL, NetworkMode::Network).unwrap();
    let load = [step("d1", vec![120.0])];
    let inputs = EdInputs { wind: &[], load: &load, status: &[false] };
    let (mp, vm) = build_ed(&ctx, &inputs, &state(&[-5]), 1, 300).unwrap();
    let sol = solve(&mp);
    let d = extract_dispatch(&sol, &vm, &ctx, 0).unwrap();
    assert!((d.shed_mw[0][0] - 120.0).abs() < 1e-9);
    assert!((d.ens_mwh() - 10.0).abs() < 1e-9);
    assert!((d.costs.total() - sol.objective.unwrap()).abs() <= 1e-6 * sol.objective.unwrap());
}

#[test]
fn committed_capacity_serves_load() {
    let sys = single_bus(vec![unit("g1", "b1", 10.0, 50.0, 20.0), unit("g2", "b1", 20.0, 80.0, 35.0)], false);
    let ctx = ModelContext::new(&sys, VOLL, NetworkMode::Network).unwrap();
    let load = [step("d1", (0..12).map(|k| 60.0 + 5.0 * k as f64).collect())];
    let inputs = EdInputs { wind: &[], load: &load, status: &[true, true] };
    let (mp, vm) = build_ed(&ctx, &inputs, &state(&[4, 4]), 12, 300).unwrap();
    let sol = solve(&mp);
    let d = extract_dispatch(&sol, &vm, &ctx, 0).unwrap();
    assert!(d.shed_mw.iter().flatten().all(|&s| s.abs() < 1e-9));
    assert!(d.max_balance_residual(&ctx) <= 1e-6);
}

#[test]
fn excess_wind_is_curtailed() {
    let sys = single_bus(vec![unit("g1", "b1", 10.0, 50.0, 20.0)], true);
    let ctx = ModelContext::new(&sys, VOLL, NetworkMode::Network).unwrap();
    let wind = [step("w1", vec![100.0])];
    let load = [step("d1", vec![50.0])];
    let inputs = EdInputs { wind: &wind, load: &load, status: &[true] };
    let (mp, vm) = build_ed(&ctx, &inputs, &state(&[4]), 1, 300).unwrap();
    let sol = solve(&mp);
    let d = extract_dispatch(&sol, &vm, &ctx, 0).unwrap();
    assert!((d.thermal_mw[0][0] - 10.0).abs() < 1e-9);
    assert!((d.wind_mw[0][0] - 40.0).abs() < 1e-9);
    assert!(d.surplus_mw.iter().flatten().all(|&s| s.abs() < 1e-9));
    assert!((d.costs.total() - 10.0 * 20.0 / 12.0).abs() < 1e-9);
}

#[test]
fn single_scenario_collapses_to_deterministic() {
    for seed in 0..10 {
        collapse_check(seed).unwrap();
    }
}

fn check_recomputed(sol: &Solution, vm: &VarMap, ctx: &ModelContext<'_>) {
    let total: f64 = (0..vm.n_scenarios())
        .map(|s| vm.probabilities[s] * extract_dispatch(sol, vm, ctx, s).unwrap().costs.total())
        .sum();
    let obj = sol.objective.unwrap();
    assert!((total - obj).abs() <= 1e-6 * obj.abs().max(1.0), "{total} vs {obj}");
}

#[test]
fn named_rows_hold_and_costs_recompute() {
    for seed in 10..16 {
        let case = random_case(seed, 5);
        let ctx = ModelContext::new(&case.sys, VOLL, NetworkMode::Network).unwrap();
        let load = [hourly("d1", case.load.clone())];
        let (uc, vm) = build_uc(&ctx, &[hourly("w1", case.wind.clone())], &load, &case.state, 5).unwrap();
        let sol = solve(&uc);
        assert!(max_violation(&uc, &sol.primal) <= 1e-6);
        check_recomputed(&sol, &vm, &ctx);
        for s in 0..vm.n_scenarios() {
            assert!(extract_dispatch(&sol, &vm, &ctx, s).unwrap().max_balance_residual(&ctx) <= 1e-6);
        }

        let members: Vec<TimeSeries> = (0..3)
            .map(|k| TimeSeries::new(0, 3600, case.wind.iter().map(|w| w * (0.5 + 0.5 * k as f64)).collect()).unwrap())
            .collect();
        let set = ForecastSet::scenarios("w1", ForecastOrigin::External, members, vec![0.2, 0.3, 0.5]).unwrap();
        let (suc, vm) = build_suc(&ctx, &[set], &load, &case.state, 5).unwrap();
        let sol = solve(&suc);
        assert!(max_violation(&suc, &sol.primal) <= 1e-6);
        check_recomputed(&sol, &vm, &ctx);

        let schedule = extract_commitment(&sol, &vm, &ctx).unwrap();
        let wind = [step("w1", case.wind[..1].repeat(12))];
        let demand = [step("d1", case.load[..1].repeat(12))];
        let status = schedule.hour(0);
        let inputs = EdInputs { wind: &wind, load: &demand, status: &status };
        let (ed, vm) = build_ed(&ctx, &inputs, &case.state, 12, 300).unwrap();
        let sol = solve(&ed);
        assert!(max_violation(&ed, &sol.primal) <= 1e-6);
        check_recomputed(&sol, &vm, &ctx);
    }
}

#[test]
fn copper_plate_never_costs_more() {
    for seed in 20..30 {
        let case = random_case(seed, 4);
        let load = [hourly("d1", case.load.clone())];
        let wind = [hourly("w1", case.wind.clone())];
        let obj = |mode| {
            let ctx = ModelContext::new(&case.sys, VOLL, mode).unwrap();
            let (mp, _) = build_uc(&ctx, &wind, &load, &case.state, 4).unwrap();
            solve(&mp).objective.unwrap()
        };
        let (net, copper) = (obj(NetworkMode::Network), obj(NetworkMode::CopperPlate));
        assert!(copper <= net + 1e-6 * net.abs().max(1.0), "seed {seed}: {copper} > {net}");
    }
}

#[test]
fn two_units_three_hours_match_enumeration() {
    for seed in 30..34 {
        let mut case = random_case(seed, 3);
        case.sys.thermal_gens.truncate(2);
        case.state.units.truncate(2);
        let ctx = ModelContext::new(&case.sys, VOLL, NetworkMode::Network).unwrap();
        let (mp, vm) =
            build_uc(&ctx, &[hourly("w1", case.wind.clone())], &[hourly("d1", case.load.clone())], &case.state, 3).unwrap();
        let milp = solve(&mp).objective.unwrap();

        let mut best = f64::INFINITY;
        for mask in 0u32..64 {
            let mut fixed = mp.clone();
            for g in 0..2u32 {
                for t in 0..3u32 {
                    let c = vm.col(VarKey::Commit { gen: g, t }).unwrap();
                    let on = f64::from((mask >> (g * 3 + t)) & 1);
                    fixed.col_lower[c] = fixed.col_lower[c].max(on);
                    fixed.col_upper[c] = fixed.col_upper[c].min(on);
                }
            }
            if fixed.col_lower.iter().zip(&fixed.col_upper).any(|(l, u)| l > u) {
                continue;
            }
            fixed.integer.iter_mut().for_each(|i| *i = false);
            let sol = solve_lp(&fixed, &settings()).unwrap();
            if sol.status == SolveStatus::Optimal {
                best = best.min(sol.objective.unwrap());
            }
        }
        assert!((best - milp).abs() <= 1e-6 * milp.abs().max(1.0), "seed {seed}: {best} vs {milp}");
    }
}

#[test]
fn scenario_count_scales_dispatch_columns() {
    let case = random_case(40, 24);
    let ctx = ModelContext::new(&case.sys, VOLL, NetworkMode::Network).unwrap();
    let load = [hourly("d1", case.load.clone())];
    let series = TimeSeries::new(0, 3600, case.wind.clone()).unwrap();
    let cols = |n: usize| {
        let set = ForecastSet::scenarios("w1", ForecastOrigin::External, vec![series.clone(); n], vec![1.0 / n as f64; n]).unwrap();
        build_suc(&ctx, &[set], &load, &case.state, 24).unwrap().0.n_cols()
    };
    let shared = 2 * case.sys.thermal_gens.len() * 24;
    let per_scenario = cols(1) - shared;
    assert_eq!(cols(100), shared + 100 * per_scenario);
}

#[test]
fn copied_realizations_are_refused() {
    let sys = example_605();
    let ctx = ModelContext::new(&sys, VOLL, NetworkMode::Network).unwrap();
    let real = RealizationSeries::new("d1", TimeSeries::new(0, 3600, vec![30.0]).unwrap());
    let leak = ForecastSet::point("d1", ForecastOrigin::CopiedRealization { source: real.id }, real.series.clone());
    let err = build_uc(&ctx, &[], &[leak], &state(&[-1]), 1).unwrap_err();
    assert!(matches!(err, FormulationError::ForecastLeakage { .. }));
}
