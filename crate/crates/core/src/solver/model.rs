use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::SolverError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

/// A minimization problem
///
/// ```text
/// min  c'x + offset
/// s.t. a_i'x {<=, =, >=} b_i   for every row i
///      l <= x <= u
///      x_j integer             where flagged
/// ```
///
/// The coefficient matrix is kept as `(row, col, value)` triplets; duplicates
/// are summed when the solver compiles the problem.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StandardFormMP {
    pub col_names: Vec<String>,
    pub objective: Vec<f64>,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub integer: Vec<bool>,
    pub row_names: Vec<String>,
    pub row_sense: Vec<RowSense>,
    pub rhs: Vec<f64>,
    pub triplets: Vec<(usize, usize, f64)>,
    /// Constant added to the objective.
    pub objective_offset: f64,
}

impl StandardFormMP {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn add_col(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64, integer: bool) -> usize {
        self.col_names.push(name.into());
        self.objective.push(cost);
        self.col_lower.push(lower);
        self.col_upper.push(upper);
        self.integer.push(integer);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, name: impl Into<String>, sense: RowSense, rhs: f64, coeffs: &[(usize, f64)]) -> usize {
        let row = self.rhs.len();
        self.row_names.push(name.into());
        self.row_sense.push(sense);
        self.rhs.push(rhs);
        self.triplets.extend(coeffs.iter().filter(|(_, v)| *v != 0.0).map(|&(c, v)| (row, c, v)));
        row
    }

    pub fn has_integers(&self) -> bool {
        self.integer.iter().any(|i| *i)
    }

    /// Checks the structural invariants.
    pub fn check(&self) -> Result<(), SolverError> {
        let n = self.n_cols();
        let m = self.n_rows();
        if self.col_names.len() != n || self.col_lower.len() != n || self.col_upper.len() != n || self.integer.len() != n {
            return Err(SolverError::Malformed("column arrays differ in length"));
        }
        if self.row_names.len() != m || self.row_sense.len() != m {
            return Err(SolverError::Malformed("row arrays differ in length"));
        }
        for &(r, c, v) in &self.triplets {
            if r >= m || c >= n {
                return Err(SolverError::Malformed("triplet index out of range"));
            }
            if !v.is_finite() {
                return Err(SolverError::Malformed("non-finite coefficient"));
            }
        }
        for j in 0..n {
            let (l, u) = (self.col_lower[j], self.col_upper[j]);
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(SolverError::InvalidBounds(j));
            }
            if !self.objective[j].is_finite() {
                return Err(SolverError::Malformed("non-finite objective coefficient"));
            }
        }
        if self.rhs.iter().any(|b| !b.is_finite()) || !self.objective_offset.is_finite() {
            return Err(SolverError::Malformed("non-finite right-hand side"));
        }
        Ok(())
    }

    /// `c'x + offset`.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() + self.objective_offset
    }

    /// Row activities `Ax`.
    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        let mut act = alloc::vec![0.0; self.n_rows()];
        for &(r, c, v) in &self.triplets {
            act[r] += v * x[c];
        }
        act
    }
}
