//! Plain-text dump of a model in the common LP file layout, readable by most
//! external solvers:
//!
//! ```text
//! \ <comment>
//! Minimize
//!  obj: 3 x0 + 2 x1 + 5
//! Subject To
//!  r0: 1 x0 + 1 x1 >= 1
//! Bounds
//!  0 <= x0 <= 1
//!  x1 free
//! General
//!  x0
//! End
//! ```
//!
//! Column and row names are sanitized to `[A-Za-z0-9_.]` and prefixed with
//! `x`/`r` plus their index so they stay unique.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::model::{RowSense, StandardFormMP};

fn sanitize(prefix: char, idx: usize, name: &str) -> String {
    let mut s = format!("{prefix}{idx}");
    if !name.is_empty() {
        s.push('_');
        s.extend(name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '_' { c } else { '_' }));
    }
    s
}

fn term(out: &mut String, first: bool, coef: f64, var: &str) {
    if first {
        let _ = write!(out, " {coef:?} {var}");
    } else if coef < 0.0 {
        let _ = write!(out, " - {:?} {var}", -coef);
    } else {
        let _ = write!(out, " + {coef:?} {var}");
    }
}

pub fn write_lp(mp: &StandardFormMP, comment: &str) -> String {
    let cols: Vec<String> = mp.col_names.iter().enumerate().map(|(j, n)| sanitize('x', j, n)).collect();
    let mut rows: Vec<Vec<(usize, f64)>> = (0..mp.n_rows()).map(|_| Vec::new()).collect();
    for &(r, c, v) in &mp.triplets {
        rows[r].push((c, v));
    }
    let mut out = String::new();
    for line in comment.lines() {
        let _ = writeln!(out, "\\ {line}");
    }
    out.push_str("Minimize\n obj:");
    let mut first = true;
    for (j, &c) in mp.objective.iter().enumerate() {
        if c != 0.0 {
            term(&mut out, first, c, &cols[j]);
            first = false;
        }
    }
    if mp.objective_offset != 0.0 || first {
        let c = mp.objective_offset;
        if first {
            let _ = write!(out, " {c:?}");
        } else if c < 0.0 {
            let _ = write!(out, " - {:?}", -c);
        } else {
            let _ = write!(out, " + {c:?}");
        }
    }
    out.push_str("\nSubject To\n");
    for (i, terms) in rows.iter().enumerate() {
        let _ = write!(out, " {}:", sanitize('r', i, &mp.row_names[i]));
        if terms.is_empty() {
            let _ = write!(out, " 0 {}", cols.first().map_or("x0", |s| s.as_str()));
        }
        for (k, &(c, v)) in terms.iter().enumerate() {
            term(&mut out, k == 0, v, &cols[c]);
        }
        let op = match mp.row_sense[i] {
            RowSense::Le => "<=",
            RowSense::Ge => ">=",
            RowSense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {:?}", mp.rhs[i]);
    }
    out.push_str("Bounds\n");
    for (j, name) in cols.iter().enumerate() {
        let (l, u) = (mp.col_lower[j], mp.col_upper[j]);
        match (l.is_finite(), u.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
            (true, true) if l == u => {
                let _ = writeln!(out, " {name} = {l:?}");
            }
            (true, true) => {
                let _ = writeln!(out, " {l:?} <= {name} <= {u:?}");
            }
            (true, false) => {
                let _ = writeln!(out, " {name} >= {l:?}");
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {u:?}");
            }
        }
    }
    let ints: Vec<&String> = cols.iter().zip(&mp.integer).filter(|(_, i)| **i).map(|(c, _)| c).collect();
    if !ints.is_empty() {
        out.push_str("General\n");
        for c in ints {
            let _ = writeln!(out, " {c}");
        }
    }
    out.push_str("End\n");
    out
}
