//! Matrices affine in a vector of scalar decision variables.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::{Add, Neg, Sub};

use nalgebra::DMatrix;

/// `constant + sum_v x[v] * terms[v]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMatrixExpr {
    pub constant: DMatrix<f64>,
    pub terms: BTreeMap<usize, DMatrix<f64>>,
}

impl AffineMatrixExpr {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { constant: DMatrix::zeros(rows, cols), terms: BTreeMap::new() }
    }

    pub fn constant(m: DMatrix<f64>) -> Self {
        Self { constant: m, terms: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(DMatrix::identity(n, n))
    }

    /// Matrix whose entry `(r, c)` is `sum coef * x[var]` over `entry(r, c)`.
    pub fn from_entries(rows: usize, cols: usize, entry: impl Fn(usize, usize) -> Vec<(usize, f64)>) -> Self {
        let mut out = Self::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                for (v, k) in entry(r, c) {
                    out.terms.entry(v).or_insert_with(|| DMatrix::zeros(rows, cols))[(r, c)] += k;
                }
            }
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.constant.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.constant.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.constant.shape()
    }

    pub fn transpose(&self) -> Self {
        Self {
            constant: self.constant.transpose(),
            terms: self.terms.iter().map(|(v, m)| (*v, m.transpose())).collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            constant: &self.constant * k,
            terms: self.terms.iter().map(|(v, m)| (*v, m * k)).collect(),
        }
    }

    /// `lhs * self`.
    pub fn lmul(&self, lhs: &DMatrix<f64>) -> Self {
        Self {
            constant: lhs * &self.constant,
            terms: self.terms.iter().map(|(v, m)| (*v, lhs * m)).collect(),
        }
    }

    /// `self * rhs`.
    pub fn rmul(&self, rhs: &DMatrix<f64>) -> Self {
        Self {
            constant: &self.constant * rhs,
            terms: self.terms.iter().map(|(v, m)| (*v, m * rhs)).collect(),
        }
    }

    /// Rows `start..end`.
    pub fn rows_range(&self, start: usize, end: usize) -> Self {
        Self {
            constant: self.constant.rows(start, end - start).into_owned(),
            terms: self.terms.iter().map(|(v, m)| (*v, m.rows(start, end - start).into_owned())).collect(),
        }
    }

    /// `self + self^T`.
    pub fn herm(&self) -> Self {
        self + &self.transpose()
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        let mut out = self.constant.clone();
        for (v, m) in &self.terms {
            out += m * x[*v];
        }
        out
    }

    /// Variables that appear with a nonzero coefficient.
    pub fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().filter(|(_, m)| m.iter().any(|v| *v != 0.0)).map(|(v, _)| *v)
    }

    /// Largest relative asymmetry over the constant and every coefficient.
    pub fn asymmetry(&self) -> f64 {
        core::iter::once(&self.constant)
            .chain(self.terms.values())
            .map(crate::linalg::asymmetry)
            .fold(0.0, f64::max)
    }

    /// Assembles a block matrix. All blocks in a row share a height and all
    /// blocks in a column share a width.
    pub fn blocks(grid: &[Vec<AffineMatrixExpr>]) -> Self {
        let heights: Vec<usize> = grid.iter().map(|row| row[0].nrows()).collect();
        let widths: Vec<usize> = grid[0].iter().map(|b| b.ncols()).collect();
        let rows: usize = heights.iter().sum();
        let cols: usize = widths.iter().sum();
        let mut out = Self::zeros(rows, cols);
        let mut r0 = 0;
        for (bi, row) in grid.iter().enumerate() {
            assert_eq!(row.len(), widths.len(), "ragged block row {bi}");
            let mut c0 = 0;
            for (bj, b) in row.iter().enumerate() {
                assert_eq!(b.shape(), (heights[bi], widths[bj]), "block ({bi}, {bj}) has the wrong shape");
                out.constant.view_mut((r0, c0), b.shape()).copy_from(&b.constant);
                for (v, m) in &b.terms {
                    out.terms
                        .entry(*v)
                        .or_insert_with(|| DMatrix::zeros(rows, cols))
                        .view_mut((r0, c0), b.shape())
                        .copy_from(m);
                }
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        out
    }

    pub fn vstack(parts: &[AffineMatrixExpr]) -> Self {
        let grid: Vec<Vec<AffineMatrixExpr>> = parts.iter().map(|p| alloc::vec![p.clone()]).collect();
        Self::blocks(&grid)
    }

    pub fn hstack(parts: &[AffineMatrixExpr]) -> Self {
        Self::blocks(&[parts.to_vec()])
    }

    /// Symmetric block matrix from its upper triangle; `upper[i][j - i]` holds
    /// block `(i, j)` for `j >= i`.
    pub fn sym_blocks(upper: &[Vec<AffineMatrixExpr>]) -> Self {
        let k = upper.len();
        let grid: Vec<Vec<AffineMatrixExpr>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if j >= i { upper[i][j - i].clone() } else { upper[j][i - j].transpose() })
                    .collect()
            })
            .collect();
        Self::blocks(&grid)
    }
}

fn combine(a: &AffineMatrixExpr, b: &AffineMatrixExpr, sign: f64) -> AffineMatrixExpr {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in affine sum");
    let mut out = a.clone();
    out.constant += &b.constant * sign;
    for (v, m) in &b.terms {
        let slot = out.terms.entry(*v).or_insert_with(|| DMatrix::zeros(a.nrows(), a.ncols()));
        *slot += m * sign;
    }
    out
}

impl Add for &AffineMatrixExpr {
    type Output = AffineMatrixExpr;
    fn add(self, rhs: Self) -> AffineMatrixExpr {
        combine(self, rhs, 1.0)
    }
}

impl Sub for &AffineMatrixExpr {
    type Output = AffineMatrixExpr;
    fn sub(self, rhs: Self) -> AffineMatrixExpr {
        combine(self, rhs, -1.0)
    }
}

impl Add for AffineMatrixExpr {
    type Output = AffineMatrixExpr;
    fn add(self, rhs: Self) -> AffineMatrixExpr {
        combine(&self, &rhs, 1.0)
    }
}

impl Sub for AffineMatrixExpr {
    type Output = AffineMatrixExpr;
    fn sub(self, rhs: Self) -> AffineMatrixExpr {
        combine(&self, &rhs, -1.0)
    }
}

impl Neg for &AffineMatrixExpr {
    type Output = AffineMatrixExpr;
    fn neg(self) -> AffineMatrixExpr {
        self.scale(-1.0)
    }
}

impl Neg for AffineMatrixExpr {
    type Output = AffineMatrixExpr;
    fn neg(self) -> AffineMatrixExpr {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn eval_of_products_matches_dense() {
        let x = AffineMatrixExpr::from_entries(2, 2, |r, c| vec![(r * 2 + c, 1.0)]);
        let l = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let vals = [0.5, -1.0, 2.0, 3.0];
        let dense = DMatrix::from_row_slice(2, 2, &vals);
        assert_eq!(x.lmul(&l).eval(&vals), &l * &dense);
        assert_eq!(x.rmul(&l).transpose().eval(&vals), (&dense * &l).transpose());
        assert_eq!(x.herm().eval(&vals), &dense + dense.transpose());
    }

    #[test]
    fn sym_blocks_is_symmetric() {
        let a = AffineMatrixExpr::from_entries(2, 2, |r, c| vec![(r.min(c) + r.max(c), 1.0)]);
        let b = AffineMatrixExpr::from_entries(2, 1, |r, _| vec![(3 + r, 2.0)]);
        let d = AffineMatrixExpr::identity(1).scale(-1.0);
        let m = AffineMatrixExpr::sym_blocks(&[vec![a, b], vec![d]]);
        assert_eq!(m.shape(), (3, 3));
        assert!(m.asymmetry() < 1e-15);
    }
}
