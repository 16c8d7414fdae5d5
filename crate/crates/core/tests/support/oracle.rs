//! Brute-force reference solvers for small models.
//!
//! These never touch the simplex code: LPs are solved by enumerating every
//! basic solution (a choice of active rows and of columns away from their
//! bounds) with dense Gaussian elimination, and MILPs by enumerating every
//! integer assignment on top of that.

#![allow(dead_code)]

use opsim_core::rng::Prng;
use opsim_core::solver::{RowSense, StandardFormMP};

pub const FEAS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleResult {
    Optimal(f64),
    Infeasible,
}

struct Dense {
    n: usize,
    rows: Vec<Vec<f64>>,
}

impl Dense {
    fn new(mp: &StandardFormMP) -> Dense {
        let mut rows = vec![vec![0.0; mp.n_cols()]; mp.n_rows()];
        for &(r, c, v) in &mp.triplets {
            rows[r][c] += v;
        }
        Dense { n: mp.n_cols(), rows }
    }
}

/// Solves `M z = b` in place with partial pivoting; `None` when singular.
fn gauss(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &c| m[a][col].abs().total_cmp(&m[c][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..k {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..k {
                    m[r][c] -= f * m[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut z = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| m[r][c] * z[c]).sum();
        z[r] = (b[r] - s) / m[r][r];
    }
    Some(z)
}

fn combinations(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    go(0, n, k, &mut Vec::new(), f);
}

fn feasible(mp: &StandardFormMP, d: &Dense, x: &[f64]) -> bool {
    for j in 0..d.n {
        if x[j] < mp.col_lower[j] - FEAS_TOL || x[j] > mp.col_upper[j] + FEAS_TOL {
            return false;
        }
    }
    for (i, row) in d.rows.iter().enumerate() {
        let a: f64 = row.iter().zip(x).map(|(a, x)| a * x).sum();
        let ok = match mp.row_sense[i] {
            RowSense::Le => a <= mp.rhs[i] + FEAS_TOL,
            RowSense::Ge => a >= mp.rhs[i] - FEAS_TOL,
            RowSense::Eq => (a - mp.rhs[i]).abs() <= FEAS_TOL,
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Optimum of a box-bounded LP by enumerating basic solutions.
pub fn lp_by_vertices(mp: &StandardFormMP) -> OracleResult {
    let d = Dense::new(mp);
    let (m, n) = (mp.n_rows(), mp.n_cols());
    assert!(mp.col_lower.iter().chain(&mp.col_upper).all(|v| v.is_finite()), "oracle needs finite bounds");
    // A fixed column's bound is active at every vertex, so only the others
    // can be basic or choose a bound.
    let movable: Vec<usize> = (0..n).filter(|&j| mp.col_lower[j] != mp.col_upper[j]).collect();
    let mut best: Option<f64> = None;
    for k in 0..=m.min(movable.len()) {
        combinations(m, k, &mut |act: &[usize]| {
            combinations(movable.len(), k, &mut |pick: &[usize]| {
                let free: Vec<usize> = pick.iter().map(|&t| movable[t]).collect();
                let bounded: Vec<usize> = movable.iter().copied().filter(|j| !free.contains(j)).collect();
                for mask in 0u32..(1 << bounded.len()) {
                    let mut x = mp.col_lower.clone();
                    for (t, &j) in bounded.iter().enumerate() {
                        if mask >> t & 1 == 1 {
                            x[j] = mp.col_upper[j];
                        }
                    }
                    if k > 0 {
                        let mat: Vec<Vec<f64>> = act.iter().map(|&i| free.iter().map(|&j| d.rows[i][j]).collect()).collect();
                        let rhs: Vec<f64> = act
                            .iter()
                            .map(|&i| {
                                let fixed_part: f64 = (0..n).filter(|j| !free.contains(j)).map(|j| d.rows[i][j] * x[j]).sum();
                                mp.rhs[i] - fixed_part
                            })
                            .collect();
                        let Some(z) = gauss(mat, rhs) else { continue };
                        for (t, &j) in free.iter().enumerate() {
                            x[j] = z[t];
                        }
                    }
                    if feasible(mp, &d, &x) {
                        let obj = mp.objective_value(&x);
                        if best.map_or(true, |b| obj < b) {
                            best = Some(obj);
                        }
                    }
                }
            });
        });
    }
    best.map_or(OracleResult::Infeasible, OracleResult::Optimal)
}

/// Optimum of a MILP with finite integer bounds by enumerating every integer
/// assignment and solving the remaining LP by vertex enumeration.
pub fn milp_by_enumeration(mp: &StandardFormMP) -> OracleResult {
    let ints: Vec<usize> = (0..mp.n_cols()).filter(|&j| mp.integer[j]).collect();
    let ranges: Vec<(i64, i64)> = ints
        .iter()
        .map(|&j| (mp.col_lower[j].ceil() as i64, mp.col_upper[j].floor() as i64))
        .collect();
    let mut best: Option<f64> = None;
    let mut assign: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    if ranges.iter().any(|r| r.0 > r.1) {
        return OracleResult::Infeasible;
    }
    loop {
        let mut sub = mp.clone();
        for (t, &j) in ints.iter().enumerate() {
            sub.col_lower[j] = assign[t] as f64;
            sub.col_upper[j] = assign[t] as f64;
            sub.integer[j] = false;
        }
        if let OracleResult::Optimal(v) = lp_by_vertices(&sub) {
            if best.map_or(true, |b| v < b) {
                best = Some(v);
            }
        }
        let mut t = 0;
        loop {
            if t == ints.len() {
                return best.map_or(OracleResult::Infeasible, OracleResult::Optimal);
            }
            if assign[t] < ranges[t].1 {
                assign[t] += 1;
                break;
            }
            assign[t] = ranges[t].0;
            t += 1;
        }
    }
}

fn pick(prng: &mut Prng, lo: i64, hi: i64) -> i64 {
    lo + (prng.next_u64() % (hi - lo + 1) as u64) as i64
}

/// A random box-bounded LP with up to `max_cols` columns and `max_rows` rows
/// and small integer data. Most rows hold at a random integer point of the
/// box, often with equality; the rest get an arbitrary right-hand side, so
/// some instances are infeasible.
pub fn random_lp(seed: u64, max_cols: usize, max_rows: usize) -> StandardFormMP {
    let mut prng = Prng::new(seed);
    let n = pick(&mut prng, 1, max_cols as i64) as usize;
    let m = pick(&mut prng, 1, max_rows as i64) as usize;
    let mut mp = StandardFormMP::new();
    let mut anchor = Vec::with_capacity(n);
    for j in 0..n {
        let lo = pick(&mut prng, -3, 1);
        let width = pick(&mut prng, 0, 5);
        let cost = pick(&mut prng, -5, 5) as f64;
        anchor.push((lo + pick(&mut prng, 0, width)) as f64);
        mp.add_col(format!("x{j}"), lo as f64, (lo + width) as f64, cost, false);
    }
    for i in 0..m {
        let coeffs: Vec<(usize, f64)> = (0..n)
            .filter_map(|j| {
                let v = pick(&mut prng, -4, 4);
                (v != 0 && prng.next_uniform() < 0.7).then_some((j, v as f64))
            })
            .collect();
        let sense = match pick(&mut prng, 0, 5) {
            0 => RowSense::Eq,
            1 | 2 => RowSense::Ge,
            _ => RowSense::Le,
        };
        let at_anchor: f64 = coeffs.iter().map(|&(j, v)| v * anchor[j]).sum();
        let slack = pick(&mut prng, 0, 3) as f64;
        let rhs = match (prng.next_uniform() < 0.85, sense) {
            (false, _) => pick(&mut prng, -6, 10) as f64,
            (true, RowSense::Eq) => at_anchor,
            (true, RowSense::Ge) => at_anchor - slack,
            (true, RowSense::Le) => at_anchor + slack,
        };
        mp.add_row(format!("r{i}"), sense, rhs, &coeffs);
    }
    mp
}

/// A random MILP with `1..=max_ints` binary columns and up to three
/// continuous columns. Rows are anchored at a random point like
/// [`random_lp`]'s.
pub fn random_milp(seed: u64, max_ints: usize, max_rows: usize) -> StandardFormMP {
    let mut prng = Prng::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let k = pick(&mut prng, 1, max_ints as i64) as usize;
    let c = pick(&mut prng, 0, 3) as usize;
    let m = pick(&mut prng, 1, max_rows as i64) as usize;
    let mut mp = StandardFormMP::new();
    let mut anchor = Vec::with_capacity(k + c);
    for j in 0..k {
        let cost = pick(&mut prng, -9, 9) as f64;
        anchor.push(pick(&mut prng, 0, 1) as f64);
        mp.add_col(format!("b{j}"), 0.0, 1.0, cost, true);
    }
    for j in 0..c {
        let lo = pick(&mut prng, -2, 0) as f64;
        let width = pick(&mut prng, 1, 4) as f64;
        let cost = pick(&mut prng, -5, 5) as f64 + 0.5;
        anchor.push(lo + width * prng.next_uniform());
        mp.add_col(format!("y{j}"), lo, lo + width, cost, false);
    }
    for i in 0..m {
        let coeffs: Vec<(usize, f64)> = (0..k + c)
            .filter_map(|j| {
                let v = pick(&mut prng, -5, 5);
                (v != 0 && prng.next_uniform() < 0.6).then_some((j, v as f64 + if j >= k { 0.25 } else { 0.0 }))
            })
            .collect();
        let sense = if prng.next_uniform() < 0.6 { RowSense::Le } else { RowSense::Ge };
        let at_anchor: f64 = coeffs.iter().map(|&(j, v)| v * anchor[j]).sum();
        let slack = pick(&mut prng, 0, 2) as f64 + 0.5;
        let rhs = match (prng.next_uniform() < 0.85, sense) {
            (false, _) => pick(&mut prng, -4, 8) as f64 + 0.5,
            (_, RowSense::Ge) => at_anchor - slack,
            _ => at_anchor + slack,
        };
        mp.add_row(format!("r{i}"), sense, rhs, &coeffs);
    }
    mp
}
