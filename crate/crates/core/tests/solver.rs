mod support;

use opsim_core::solver::{
    duality_gap, solve_lp, solve_milp, verify_solution, PivotRule, RowSense, SolveStatus, SolverError, SolverSettings,
    StandardFormMP,
};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use support::oracle::{lp_by_vertices, milp_by_enumeration, random_lp, random_milp, OracleResult};

fn exact() -> SolverSettings {
    SolverSettings { mip_gap: 1e-9, ..SolverSettings::default() }
}

fn check_lp(mp: &StandardFormMP, settings: &SolverSettings) {
    let sol = solve_lp(mp, settings).unwrap();
    match lp_by_vertices(mp) {
        OracleResult::Optimal(v) => {
            assert_eq!(sol.status, SolveStatus::Optimal, "oracle optimum {v}");
            let obj = sol.objective.unwrap();
            assert!((obj - v).abs() <= 1e-6, "solver {obj} vs oracle {v}");
            let report = verify_solution(mp, &sol.primal, 1e-6);
            assert!(report.feasible, "{report:?}");
            let gap = duality_gap(mp, &sol.primal, &sol.duals, 1e-9);
            assert!(gap <= 1e-6 * (1.0 + obj.abs()), "duality gap {gap}");
        }
        OracleResult::Infeasible => assert_eq!(sol.status, SolveStatus::Infeasible),
    }
}

#[test]
fn covering_lp() {
    let mut mp = StandardFormMP::new();
    let a = mp.add_col("x1", 0.0, f64::INFINITY, 1.0, false);
    let b = mp.add_col("x2", 0.0, f64::INFINITY, 1.0, false);
    mp.add_row("cover", RowSense::Ge, 1.0, &[(a, 1.0), (b, 1.0)]);
    let sol = solve_lp(&mp, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.objective.unwrap() - 1.0).abs() < 1e-12);
    assert!((sol.duals[0] - 1.0).abs() < 1e-12);
}

#[test]
fn contradictory_bounds_are_infeasible() {
    let mut mp = StandardFormMP::new();
    let x = mp.add_col("x", 0.0, f64::INFINITY, 0.0, false);
    mp.add_row("neg", RowSense::Le, -1.0, &[(x, 1.0)]);
    assert_eq!(solve_lp(&mp, &SolverSettings::default()).unwrap().status, SolveStatus::Infeasible);
}

#[test]
fn ray_is_unbounded() {
    let mut mp = StandardFormMP::new();
    mp.add_col("x", 0.0, f64::INFINITY, -1.0, false);
    assert_eq!(solve_lp(&mp, &SolverSettings::default()).unwrap().status, SolveStatus::Unbounded);
}

#[test]
fn lp_rejects_integer_columns() {
    let mut mp = StandardFormMP::new();
    mp.add_col("x", 0.0, 1.0, 1.0, true);
    assert_eq!(solve_lp(&mp, &SolverSettings::default()), Err(SolverError::IntegralityPresent));
}

#[test]
fn malformed_models_are_rejected() {
    let mut mp = StandardFormMP::new();
    mp.add_col("x", 2.0, 1.0, 1.0, false);
    assert_eq!(solve_lp(&mp, &SolverSettings::default()), Err(SolverError::InvalidBounds(0)));
    let mut mp = StandardFormMP::new();
    mp.add_col("x", 0.0, 1.0, 1.0, false);
    mp.triplets.push((3, 0, 1.0));
    assert!(matches!(solve_lp(&mp, &SolverSettings::default()), Err(SolverError::Malformed(_))));
}

#[test]
fn free_variables_and_equalities() {
    // min |x - 3| via x = 3 + p - q, p, q >= 0, x free.
    let mut mp = StandardFormMP::new();
    let x = mp.add_col("x", f64::NEG_INFINITY, f64::INFINITY, 0.0, false);
    let p = mp.add_col("p", 0.0, f64::INFINITY, 1.0, false);
    let q = mp.add_col("q", 0.0, f64::INFINITY, 1.0, false);
    mp.add_row("def", RowSense::Eq, 3.0, &[(x, 1.0), (p, -1.0), (q, 1.0)]);
    mp.add_row("cap", RowSense::Le, 1.0, &[(x, 1.0)]);
    let sol = solve_lp(&mp, &SolverSettings::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.objective.unwrap() - 2.0).abs() < 1e-12);
    assert!((sol.primal[x] - 1.0).abs() < 1e-12);
}

#[test]
fn binary_pair_tie_break() {
    let mut mp = StandardFormMP::new();
    let a = mp.add_col("x1", 0.0, 1.0, -1.0, true);
    let b = mp.add_col("x2", 0.0, 1.0, -1.0, true);
    mp.add_row("cap", RowSense::Le, 1.5, &[(a, 1.0), (b, 1.0)]);
    for dive in [true, false] {
        let sol = solve_milp(&mp, &SolverSettings { dive_heuristic: dive, ..exact() }).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.objective, Some(-1.0));
        assert_eq!(sol.primal, vec![1.0, 0.0], "dive {dive}");
    }
}

#[test]
fn integral_root_takes_one_node() {
    let mut mp = StandardFormMP::new();
    let a = mp.add_col("x1", 0.0, 1.0, -2.0, true);
    let b = mp.add_col("x2", 0.0, 5.0, 1.0, false);
    mp.add_row("link", RowSense::Ge, 0.5, &[(a, 1.0), (b, 1.0)]);
    let milp = solve_milp(&mp, &exact()).unwrap();
    assert_eq!(milp.nodes, 1);
    let mut relaxed = mp.clone();
    relaxed.integer = vec![false; 2];
    let lp = solve_lp(&relaxed, &exact()).unwrap();
    assert_eq!(milp.objective, lp.objective);
    assert_eq!(milp.primal, lp.primal);
}

#[test]
fn milp_without_integers_delegates() {
    let mp = random_lp(11, 4, 4);
    assert_eq!(solve_milp(&mp, &exact()).unwrap(), solve_lp(&mp, &exact()).unwrap());
}

#[test]
fn node_limit_keeps_incumbent_status() {
    let mp = random_milp(5, 10, 6);
    let sol = solve_milp(&mp, &SolverSettings { node_limit: 1, dive_heuristic: false, ..exact() }).unwrap();
    assert!(matches!(sol.status, SolveStatus::NodeLimit | SolveStatus::Optimal | SolveStatus::Infeasible));
    assert!(sol.nodes <= 1);
}

#[test]
fn verify_reports_worst_row() {
    let mut mp = StandardFormMP::new();
    let x = mp.add_col("x", f64::NEG_INFINITY, f64::INFINITY, 1.0, false);
    mp.add_row("floor", RowSense::Ge, 1.0, &[(x, 1.0)]);
    let r = verify_solution(&mp, &[0.0], 1e-9);
    assert_eq!(r.max_violation, 1.0);
    assert_eq!(r.worst_row.as_deref(), Some("floor"));
    assert!(!r.feasible);
}

#[test]
fn bland_rule_agrees_with_dantzig() {
    let settings = SolverSettings { pivot_rule: PivotRule::Bland, ..exact() };
    for seed in 0..40 {
        check_lp(&random_lp(seed, 6, 6), &settings);
    }
}

#[test]
fn tiny_refactor_interval_agrees() {
    let settings = SolverSettings { refactor_interval: 1, ..exact() };
    for seed in 100..140 {
        check_lp(&random_lp(seed, 8, 8), &settings);
    }
}

#[test]
fn repeated_solves_are_bit_identical() {
    for seed in 0..20 {
        let mp = random_milp(seed, 8, 5);
        let a = solve_milp(&mp, &exact()).unwrap();
        let b = solve_milp(&mp, &exact()).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.nodes, b.nodes);
        let bits = |s: &opsim_core::solver::Solution| s.primal.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}

/// Oracle suites draw the same cases every run so their runtime is stable.
fn fixed_cases(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0x0b5e_55ed), ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(fixed_cases(200))]

    #[test]
    fn lp_matches_vertex_enumeration(seed in any::<u64>()) {
        check_lp(&random_lp(seed, 8, 8), &exact());
    }
}

proptest! {
    #![proptest_config(fixed_cases(50))]

    #[test]
    fn milp_matches_enumeration(seed in any::<u64>()) {
        let mp = random_milp(seed, 10, 6);
        let sol = solve_milp(&mp, &exact()).unwrap();
        match milp_by_enumeration(&mp) {
            OracleResult::Optimal(v) => {
                prop_assert_eq!(sol.status, SolveStatus::Optimal);
                let obj = sol.objective.unwrap();
                prop_assert!((obj - v).abs() <= 1e-6, "solver {} vs oracle {}", obj, v);
                let report = verify_solution(&mp, &sol.primal, 1e-6);
                prop_assert!(report.feasible, "{:?}", report);
            }
            OracleResult::Infeasible => prop_assert_eq!(sol.status, SolveStatus::Infeasible),
        }
    }
}

