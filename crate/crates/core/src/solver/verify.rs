use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::model::{RowSense, StandardFormMP};

/// Independent check of a point against a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    /// Largest violation over all rows and bounds.
    pub max_violation: f64,
    pub worst_row: Option<String>,
    pub worst_row_violation: f64,
    pub worst_column: Option<String>,
    pub worst_bound_violation: f64,
    /// Integer columns off by more than the tolerance.
    pub fractional_columns: usize,
    /// `c'x + offset` recomputed from the point.
    pub objective: f64,
    pub feasible: bool,
}

/// Evaluates every row and bound of `mp` at `primal`.
///
/// # Panics
/// If `primal` does not have one entry per column.
pub fn verify_solution(mp: &StandardFormMP, primal: &[f64], tol: f64) -> VerifyReport {
    assert_eq!(primal.len(), mp.n_cols(), "point length differs from column count");
    let act = mp.row_activity(primal);
    let mut worst_row = None;
    let mut worst_row_violation = 0.0;
    for (i, (&a, &b)) in act.iter().zip(&mp.rhs).enumerate() {
        let v = match mp.row_sense[i] {
            RowSense::Le => (a - b).max(0.0),
            RowSense::Ge => (b - a).max(0.0),
            RowSense::Eq => (a - b).abs(),
        };
        if v > worst_row_violation {
            worst_row_violation = v;
            worst_row = Some(i);
        }
    }
    let mut worst_col = None;
    let mut worst_bound_violation = 0.0;
    let mut fractional_columns = 0;
    for (j, &x) in primal.iter().enumerate() {
        let v = (mp.col_lower[j] - x).max(x - mp.col_upper[j]).max(0.0);
        let v = if x.is_nan() { f64::INFINITY } else { v };
        if v > worst_bound_violation {
            worst_bound_violation = v;
            worst_col = Some(j);
        }
        if mp.integer[j] && (x - libm::round(x)).abs() > tol {
            fractional_columns += 1;
        }
    }
    let max_violation = worst_row_violation.max(worst_bound_violation);
    VerifyReport {
        max_violation,
        worst_row: worst_row.map(|i| mp.row_names[i].clone()),
        worst_row_violation,
        worst_column: worst_col.map(|j| mp.col_names[j].clone()),
        worst_bound_violation,
        fractional_columns,
        objective: mp.objective_value(primal),
        feasible: max_violation <= tol && fractional_columns == 0,
    }
}

/// `|c'x - dual objective|` for an LP point `x` with row duals `y`.
///
/// The dual objective is `b'y` plus, for each column, its reduced cost times
/// the bound it prices against: the lower bound for a positive reduced cost,
/// the upper bound for a negative one. A reduced cost pointing at an infinite
/// bound, or a row dual of the wrong sign, makes the dual infeasible and the
/// gap infinite.
pub fn duality_gap(mp: &StandardFormMP, x: &[f64], y: &[f64], tol: f64) -> f64 {
    let n = mp.n_cols();
    let mut aty: Vec<f64> = alloc::vec![0.0; n];
    for &(r, c, v) in &mp.triplets {
        aty[c] += v * y[r];
    }
    let mut dual = mp.objective_offset;
    for (i, (&yi, &b)) in y.iter().zip(&mp.rhs).enumerate() {
        let wrong_sign = match mp.row_sense[i] {
            RowSense::Le => yi > tol,
            RowSense::Ge => yi < -tol,
            RowSense::Eq => false,
        };
        if wrong_sign {
            return f64::INFINITY;
        }
        dual += yi * b;
    }
    for j in 0..n {
        let d = mp.objective[j] - aty[j];
        let bound = if d > tol {
            mp.col_lower[j]
        } else if d < -tol {
            mp.col_upper[j]
        } else {
            x[j]
        };
        if !bound.is_finite() {
            return f64::INFINITY;
        }
        dual += d * bound;
    }
    (mp.objective_value(x) - dual).abs()
}
