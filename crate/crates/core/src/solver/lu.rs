//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! The factorization is left-looking (one basis column at a time, with a
//! depth-first search for the sparsity pattern of each triangular solve) and
//! uses threshold partial pivoting that prefers short rows. Columns are
//! processed shortest first. Basis changes between refactorizations are
//! applied as eta columns.

use alloc::vec;
use alloc::vec::Vec;

/// Entries below this magnitude are dropped from eta columns.
const DROP_TOL: f64 = 1e-14;
/// Relative threshold for partial pivoting.
const PIVOT_THRESHOLD: f64 = 0.1;
/// A column whose best candidate is below this is treated as dependent.
const SINGULAR_TOL: f64 = 1e-11;

const NONE: usize = usize::MAX;

/// A basis column: row indices and values.
pub(crate) struct ColumnRef<'a> {
    pub idx: &'a [usize],
    pub val: &'a [f64],
}

/// Basis positions whose columns turned out dependent, each paired with a
/// row that no column could pivot on.
#[derive(Debug)]
pub(crate) struct Singular {
    pub replacements: Vec<(usize, usize)>,
}

struct Eta {
    pos: usize,
    pivot: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

pub(crate) struct LuFactor {
    m: usize,
    piv_row: Vec<usize>,
    row_step: Vec<usize>,
    col_pos: Vec<usize>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
    etas: Vec<Eta>,
}

impl LuFactor {
    /// Factorizes the `m x m` matrix whose column at basis position `p` is
    /// `column(p)`.
    pub(crate) fn factorize<'a>(m: usize, column: impl Fn(usize) -> ColumnRef<'a>) -> Result<LuFactor, Singular> {
        let mut row_count = vec![0usize; m];
        let mut order: Vec<(usize, usize)> = Vec::with_capacity(m);
        for p in 0..m {
            let c = column(p);
            for &r in c.idx {
                row_count[r] += 1;
            }
            order.push((c.idx.len(), p));
        }
        order.sort_unstable();

        let mut f = LuFactor {
            m,
            piv_row: Vec::with_capacity(m),
            row_step: vec![NONE; m],
            col_pos: Vec::with_capacity(m),
            l_start: vec![0],
            l_idx: Vec::new(),
            l_val: Vec::new(),
            u_start: vec![0],
            u_idx: Vec::new(),
            u_val: Vec::new(),
            u_diag: Vec::with_capacity(m),
            etas: Vec::new(),
        };

        let mut x = vec![0.0; m];
        let mut mark = vec![0u32; m];
        let mut stamp = 0u32;
        let mut reach: Vec<usize> = Vec::new();
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let mut deficient: Vec<usize> = Vec::new();

        for &(_, pos) in &order {
            let col = column(pos);
            stamp += 1;
            reach.clear();
            // Depth-first search from each nonzero row through the L columns of
            // already pivoted rows; `reach` ends up in post-order.
            for &r0 in col.idx {
                if mark[r0] == stamp {
                    continue;
                }
                mark[r0] = stamp;
                stack.push((r0, 0));
                while let Some(top) = stack.len().checked_sub(1) {
                    let (r, next) = stack[top];
                    let k = f.row_step[r];
                    let mut child = None;
                    if k != NONE {
                        let (s, e) = (f.l_start[k], f.l_start[k + 1]);
                        let mut j = s + next;
                        while j < e {
                            let c = f.l_idx[j];
                            j += 1;
                            if mark[c] != stamp {
                                child = Some(c);
                                break;
                            }
                        }
                        stack[top].1 = j - s;
                    }
                    match child {
                        Some(c) => {
                            mark[c] = stamp;
                            stack.push((c, 0));
                        }
                        None => {
                            stack.pop();
                            reach.push(r);
                        }
                    }
                }
            }
            for (&r, &v) in col.idx.iter().zip(col.val) {
                x[r] = v;
            }
            // Triangular solve in topological order.
            for &r in reach.iter().rev() {
                let k = f.row_step[r];
                if k == NONE {
                    continue;
                }
                let xk = x[r];
                if xk != 0.0 {
                    for i in f.l_start[k]..f.l_start[k + 1] {
                        x[f.l_idx[i]] -= f.l_val[i] * xk;
                    }
                }
            }
            let mut max_abs = 0.0f64;
            for &r in &reach {
                if f.row_step[r] == NONE {
                    max_abs = max_abs.max(x[r].abs());
                }
            }
            if max_abs < SINGULAR_TOL {
                for &r in &reach {
                    x[r] = 0.0;
                }
                deficient.push(pos);
                continue;
            }
            let mut best = NONE;
            for &r in &reach {
                if f.row_step[r] != NONE || x[r].abs() < PIVOT_THRESHOLD * max_abs {
                    continue;
                }
                if best == NONE || (row_count[r], r) < (row_count[best], best) {
                    best = r;
                }
            }
            let k = f.piv_row.len();
            let diag = x[best];
            for &r in &reach {
                let v = x[r];
                x[r] = 0.0;
                if v == 0.0 || r == best {
                    continue;
                }
                let s = f.row_step[r];
                if s != NONE {
                    f.u_idx.push(s);
                    f.u_val.push(v);
                } else {
                    f.l_idx.push(r);
                    f.l_val.push(v / diag);
                }
            }
            f.u_start.push(f.u_idx.len());
            f.l_start.push(f.l_idx.len());
            f.u_diag.push(diag);
            f.piv_row.push(best);
            f.row_step[best] = k;
            f.col_pos.push(pos);
        }

        if !deficient.is_empty() {
            let free_rows = (0..m).filter(|r| f.row_step[*r] == NONE);
            return Err(Singular { replacements: deficient.into_iter().zip(free_rows).collect() });
        }
        Ok(f)
    }

    pub(crate) fn n_etas(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B z = rhs` in place; `rhs` is indexed by row on entry and by
    /// basis position on exit.
    pub(crate) fn ftran(&self, rhs: &mut [f64], work: &mut [f64]) {
        let m = self.m;
        for k in 0..m {
            let xk = rhs[self.piv_row[k]];
            if xk != 0.0 {
                for i in self.l_start[k]..self.l_start[k + 1] {
                    rhs[self.l_idx[i]] -= self.l_val[i] * xk;
                }
            }
        }
        for k in 0..m {
            work[k] = rhs[self.piv_row[k]];
        }
        for k in (0..m).rev() {
            let wk = work[k] / self.u_diag[k];
            work[k] = wk;
            if wk != 0.0 {
                for i in self.u_start[k]..self.u_start[k + 1] {
                    work[self.u_idx[i]] -= self.u_val[i] * wk;
                }
            }
        }
        for k in 0..m {
            rhs[self.col_pos[k]] = work[k];
        }
        for eta in &self.etas {
            let zr = rhs[eta.pos];
            if zr == 0.0 {
                continue;
            }
            let zr = zr / eta.pivot;
            rhs[eta.pos] = zr;
            for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                rhs[i] -= a * zr;
            }
        }
    }

    /// Solves `B' y = rhs` in place; `rhs` is indexed by basis position on
    /// entry and by row on exit.
    pub(crate) fn btran(&self, rhs: &mut [f64], work: &mut [f64]) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut s = rhs[eta.pos];
            for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                s -= a * rhs[i];
            }
            rhs[eta.pos] = s / eta.pivot;
        }
        for k in 0..m {
            let mut s = rhs[self.col_pos[k]];
            for i in self.u_start[k]..self.u_start[k + 1] {
                s -= self.u_val[i] * work[self.u_idx[i]];
            }
            work[k] = s / self.u_diag[k];
        }
        for k in (0..m).rev() {
            let mut s = work[k];
            for i in self.l_start[k]..self.l_start[k + 1] {
                s -= self.l_val[i] * work[self.row_step[self.l_idx[i]]];
            }
            work[k] = s;
        }
        for k in 0..m {
            rhs[self.piv_row[k]] = work[k];
        }
    }

    /// Records that the column at basis position `pos` was replaced by one
    /// whose representation in the current basis is `alpha`.
    pub(crate) fn push_eta(&mut self, pos: usize, alpha: &[f64]) {
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if i != pos && a.abs() > DROP_TOL {
                idx.push(i);
                val.push(a);
            }
        }
        self.etas.push(Eta { pos, pivot: alpha[pos], idx, val });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Dense {
        cols: Vec<(Vec<usize>, Vec<f64>)>,
    }

    impl Dense {
        fn new(a: &[&[f64]]) -> Dense {
            let m = a.len();
            let cols = (0..m)
                .map(|j| {
                    let mut idx = Vec::new();
                    let mut val = Vec::new();
                    for i in 0..m {
                        if a[i][j] != 0.0 {
                            idx.push(i);
                            val.push(a[i][j]);
                        }
                    }
                    (idx, val)
                })
                .collect();
            Dense { cols }
        }

        fn factor(&self) -> Result<LuFactor, Singular> {
            LuFactor::factorize(self.cols.len(), |p| ColumnRef { idx: &self.cols[p].0, val: &self.cols[p].1 })
        }
    }

    fn mat_vec(a: &[&[f64]], x: &[f64]) -> Vec<f64> {
        a.iter().map(|row| row.iter().zip(x).map(|(a, x)| a * x).sum()).collect()
    }

    fn mat_t_vec(a: &[&[f64]], y: &[f64]) -> Vec<f64> {
        (0..a.len()).map(|j| (0..a.len()).map(|i| a[i][j] * y[i]).sum()).collect()
    }

    const A: [&[f64]; 4] = [
        &[2.0, 0.0, 1.0, 0.0],
        &[0.0, -1.0, 0.0, 3.0],
        &[4.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 5.0, 1.0],
    ];

    #[test]
    fn ftran_btran_solve() {
        let d = Dense::new(&A);
        let lu = d.factor().unwrap();
        let mut w = vec![0.0; 4];
        let b = [1.0, -2.0, 3.0, 0.5];
        let mut z = b.to_vec();
        lu.ftran(&mut z, &mut w);
        let back = mat_vec(&A, &z);
        for (x, y) in back.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        let mut y = b.to_vec();
        lu.btran(&mut y, &mut w);
        let back = mat_t_vec(&A, &y);
        for (x, y) in back.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_update_matches_refactor() {
        let d = Dense::new(&A);
        let mut lu = d.factor().unwrap();
        let mut w = vec![0.0; 4];
        // Replace column 1 by (1, 1, 1, 1).
        let newcol = [1.0, 1.0, 1.0, 1.0];
        let mut alpha = newcol.to_vec();
        lu.ftran(&mut alpha, &mut w);
        lu.push_eta(1, &alpha);
        let a2: [&[f64]; 4] = [&[2.0, 1.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 3.0], &[4.0, 1.0, 0.0, 0.0], &[0.0, 1.0, 5.0, 1.0]];
        let b = [0.3, 1.0, -4.0, 2.0];
        let mut z = b.to_vec();
        lu.ftran(&mut z, &mut w);
        for (x, y) in mat_vec(&a2, &z).iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        let mut y = b.to_vec();
        lu.btran(&mut y, &mut w);
        for (x, y) in mat_t_vec(&a2, &y).iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn dependent_column_reported() {
        let a: [&[f64]; 3] = [&[1.0, 2.0, 0.0], &[1.0, 2.0, 0.0], &[0.0, 0.0, 1.0]];
        let d = Dense::new(&a);
        let err = d.factor().err().expect("singular");
        assert_eq!(err.replacements.len(), 1);
    }
}
