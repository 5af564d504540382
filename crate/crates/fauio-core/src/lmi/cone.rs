//! Lowering of symmetric affine constraints to the standard conic form
//! `minimize c^T x  s.t.  s = b - A x,  s in K`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use nalgebra::DMatrix;

use super::affine::AffineMatrixExpr;
use crate::error::{Error, Result};

const SQRT2: f64 = core::f64::consts::SQRT_2;

/// Length of the packed triangle of an `n x n` symmetric matrix.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Upper triangle, column by column, off-diagonal entries scaled by `sqrt 2`
/// so that `<svec A, svec B> = trace(A B)`.
pub fn svec(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(svec_len(n));
    for c in 0..n {
        for r in 0..=c {
            let v = 0.5 * (m[(r, c)] + m[(c, r)]);
            out.push(if r == c { v } else { v * SQRT2 });
        }
    }
    out
}

pub fn smat(v: &[f64]) -> DMatrix<f64> {
    let n = libm::round((libm::sqrt(8.0 * v.len() as f64 + 1.0) - 1.0) / 2.0) as usize;
    assert_eq!(svec_len(n), v.len(), "length is not triangular");
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for c in 0..n {
        for r in 0..=c {
            let val = if r == c { v[k] } else { v[k] / SQRT2 };
            m[(r, c)] = val;
            m[(c, r)] = val;
            k += 1;
        }
    }
    m
}

/// How a symmetric affine expression is constrained.
#[derive(Debug, Clone, PartialEq)]
pub enum Sense {
    /// `expr <= 0`.
    NegSemidefinite,
    /// `expr >= margin * I`.
    AtLeast(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub expr: AffineMatrixExpr,
    pub sense: Sense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeKind {
    /// Packed PSD triangle of an `n x n` matrix.
    Psd(usize),
    Nonnegative(usize),
}

impl ConeKind {
    pub fn rows(&self) -> usize {
        match *self {
            ConeKind::Psd(n) => svec_len(n),
            ConeKind::Nonnegative(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeBlock {
    pub name: String,
    pub kind: ConeKind,
    pub row_offset: usize,
}

/// Sparse standard-form program. `a` holds `(row, col, value)` triplets
/// sorted by column then row.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub cones: Vec<ConeBlock>,
    pub var_names: Vec<String>,
}

impl ConeProgram {
    pub fn n_rows(&self) -> usize {
        self.b.len()
    }

    /// Slack `b - A x`.
    pub fn slack(&self, x: &[f64]) -> Vec<f64> {
        let mut s = self.b.clone();
        for &(r, c, v) in &self.a {
            s[r] -= v * x[c];
        }
        s
    }

    /// Dense view of the slack of cone `k` (PSD cones only unpack to a matrix).
    pub fn cone_slack_matrix(&self, k: usize, x: &[f64]) -> Option<DMatrix<f64>> {
        let cone = &self.cones[k];
        match cone.kind {
            ConeKind::Psd(_) => {
                let s = self.slack(x);
                Some(smat(&s[cone.row_offset..cone.row_offset + cone.kind.rows()]))
            }
            ConeKind::Nonnegative(_) => None,
        }
    }

    /// Text dump: header, objective, then per cone its triplets and `b`
    /// entries with rows local to the cone.
    pub fn to_triplet_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "fauio-cone-program 1");
        let _ = writeln!(out, "vars {}", self.n_vars);
        let _ = writeln!(out, "rows {}", self.n_rows());
        let _ = writeln!(out, "objective");
        for (j, v) in self.objective.iter().enumerate() {
            if *v != 0.0 {
                let _ = writeln!(out, "{j} {v:.17e}");
            }
        }
        for cone in &self.cones {
            let (kind, n) = match cone.kind {
                ConeKind::Psd(n) => ("psd", n),
                ConeKind::Nonnegative(n) => ("nonneg", n),
            };
            let len = cone.kind.rows();
            let _ = writeln!(out, "cone {} {kind} {n} rows {} {}", cone.name, cone.row_offset, len);
            let range = cone.row_offset..cone.row_offset + len;
            for &(r, c, v) in self.a.iter().filter(|t| range.contains(&t.0)) {
                let _ = writeln!(out, "A {} {c} {v:.17e}", r - cone.row_offset);
            }
            for r in range.clone() {
                if self.b[r] != 0.0 {
                    let _ = writeln!(out, "b {} {:.17e}", r - cone.row_offset, self.b[r]);
                }
            }
        }
        out
    }
}

/// Maps each constraint to one cone: `expr <= 0` becomes `-expr in PSD`,
/// `expr >= margin I` becomes `expr - margin I in PSD`. `nonneg` lists
/// variables constrained to be `>= 0`.
pub fn lower_to_cone(
    constraints: &[Constraint],
    objective: &[f64],
    nonneg: &[usize],
    var_names: Vec<String>,
) -> Result<ConeProgram> {
    let n_vars = objective.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut cones = Vec::new();
    for con in constraints {
        let (rows, cols) = con.expr.shape();
        if rows != cols {
            return Err(Error::Dimension { field: con.name.clone(), expected: (rows, rows), found: (rows, cols) });
        }
        let asym = con.expr.asymmetry();
        if asym > 1e-10 {
            return Err(Error::Asymmetric { residual: asym });
        }
        let off = b.len();
        // s = sign * (C + sum x_v A_v) - margin I  with b = sign C - margin I, A col = -sign A_v
        let (sign, margin) = match con.sense {
            Sense::NegSemidefinite => (-1.0, 0.0),
            Sense::AtLeast(m) => (1.0, m),
        };
        let constant = &con.expr.constant * sign - DMatrix::identity(rows, rows) * margin;
        b.extend(svec(&constant));
        for (v, coef) in &con.expr.terms {
            if *v >= n_vars {
                return Err(Error::IndexOutOfRange { index: *v, bound: n_vars });
            }
            for (k, val) in svec(coef).into_iter().enumerate() {
                if val != 0.0 {
                    a.push((off + k, *v, -sign * val));
                }
            }
        }
        cones.push(ConeBlock { name: con.name.clone(), kind: ConeKind::Psd(rows), row_offset: off });
    }
    if !nonneg.is_empty() {
        let off = b.len();
        for (k, v) in nonneg.iter().enumerate() {
            b.push(0.0);
            a.push((off + k, *v, -1.0));
        }
        cones.push(ConeBlock { name: "nonneg".into(), kind: ConeKind::Nonnegative(nonneg.len()), row_offset: off });
    }
    a.sort_by(|x, y| (x.1, x.0).cmp(&(y.1, y.0)));
    let mut used = alloc::vec![false; n_vars];
    for &(_, c, _) in &a {
        used[c] = true;
    }
    for (j, v) in objective.iter().enumerate() {
        if *v != 0.0 {
            used[j] = true;
        }
    }
    if let Some(j) = used.iter().position(|u| !u) {
        return Err(Error::InvalidValue {
            field: format!("variable {j}"),
            reason: "not referenced by any constraint or the objective".into(),
        });
    }
    Ok(ConeProgram { n_vars, objective: objective.to_vec(), a, b, cones, var_names })
}
