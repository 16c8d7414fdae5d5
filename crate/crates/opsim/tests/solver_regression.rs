//! A one-scenario SUC from the reference plan whose branch and bound once
//! met a fully degenerate vertex on which primal simplex cycled until the
//! iteration limit.

use opsim_core::{solve_milp, SolveStatus, SolverSettings, StandardFormMP};
use serde_json::Value;

fn degenerate_suc() -> StandardFormMP {
    let mut v: Value = serde_json::from_slice(include_bytes!("data/degenerate_suc.json")).unwrap();
    // JSON has no infinity; unbounded sides were written as null.
    for (key, far) in [("col_lower", -f64::MAX), ("col_upper", f64::MAX)] {
        for b in v[key].as_array_mut().unwrap().iter_mut().filter(|b| b.is_null()) {
            *b = Value::from(far);
        }
    }
    let mut mp: StandardFormMP = serde_json::from_value(v).unwrap();
    mp.col_lower.iter_mut().filter(|b| **b == -f64::MAX).for_each(|b| *b = f64::NEG_INFINITY);
    mp.col_upper.iter_mut().filter(|b| **b == f64::MAX).for_each(|b| *b = f64::INFINITY);
    mp
}

#[test]
fn degenerate_node_lps_terminate() {
    let mp = degenerate_suc();
    let settings = SolverSettings { mip_gap: 1e-4, node_limit: 500, ..SolverSettings::default() };
    let sol = solve_milp(&mp, &settings).unwrap();
    assert!(matches!(sol.status, SolveStatus::Optimal | SolveStatus::NodeLimit), "{:?}", sol.status);
    assert!(sol.objective.is_some());
}
