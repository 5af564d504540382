//! Decision-variable layout: which scalar index stores which matrix entry.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::affine::AffineMatrixExpr;

/// The fixed scalars multiplying decision variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedScalars {
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub beta: f64,
}

/// Kind of an `nbar x nbar` block of `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZBlockKind {
    /// `Z_ij` on the diagonal, positive definite.
    Diagonal,
    /// `Z_a`: off-diagonal inside the group of nonlinearity `i`, PSD.
    WithinGroup,
    /// `Z_b`: couples two different nonlinearities, PSD.
    CrossGroup,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZBlock {
    /// Grid position, `row <= col`.
    pub row: usize,
    pub col: usize,
    pub kind: ZBlockKind,
    /// First scalar of the packed symmetric block.
    pub offset: usize,
}

/// Scalar decision vector layout:
/// `[svec P1 | svec P2 | R1 (col-major) | R2 (col-major) | Z blocks | mu]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionLayout {
    pub n_new: usize,
    pub a1: usize,
    pub p: usize,
    pub m: usize,
    pub n_bar: usize,
    pub fixed: FixedScalars,
    p1_off: usize,
    p2_off: usize,
    r1_off: usize,
    r2_off: usize,
    pub z_blocks: Vec<ZBlock>,
    mu_off: usize,
}

fn tri(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Index of `(r, c)` inside a packed symmetric block (upper triangle,
/// column by column).
pub fn sym_index(r: usize, c: usize) -> usize {
    let (r, c) = if r <= c { (r, c) } else { (c, r) };
    tri(c) + r
}

fn sym_var(n: usize, off: usize) -> AffineMatrixExpr {
    AffineMatrixExpr::from_entries(n, n, |r, c| alloc::vec![(off + sym_index(r, c), 1.0)])
}

impl DecisionLayout {
    pub fn new(n_new: usize, a1: usize, p: usize, m: usize, n_bar: usize, fixed: FixedScalars) -> Self {
        let p1_off = 0;
        let p2_off = p1_off + tri(n_new);
        let r1_off = p2_off + tri(a1);
        let r2_off = r1_off + p * n_new;
        let mut next = r2_off + p * a1;
        let k = m * n_bar;
        let mut z_blocks = Vec::new();
        for row in 0..k {
            for col in row..k {
                let kind = if row == col {
                    ZBlockKind::Diagonal
                } else if row / n_bar == col / n_bar {
                    ZBlockKind::WithinGroup
                } else {
                    ZBlockKind::CrossGroup
                };
                z_blocks.push(ZBlock { row, col, kind, offset: next });
                next += tri(n_bar);
            }
        }
        Self { n_new, a1, p, m, n_bar, fixed, p1_off, p2_off, r1_off, r2_off, z_blocks, mu_off: next }
    }

    pub fn n_vars(&self) -> usize {
        self.mu_off + 1
    }

    pub fn mu_index(&self) -> usize {
        self.mu_off
    }

    /// Number of distinct scalars inside `Z`.
    pub fn z_scalar_count(&self) -> usize {
        self.z_blocks.len() * tri(self.n_bar)
    }

    pub fn z_dim(&self) -> usize {
        self.m * self.n_bar * self.n_bar
    }

    pub fn p1(&self) -> AffineMatrixExpr {
        sym_var(self.n_new, self.p1_off)
    }

    pub fn p2(&self) -> AffineMatrixExpr {
        sym_var(self.a1, self.p2_off)
    }

    pub fn r1(&self) -> AffineMatrixExpr {
        let (p, off) = (self.p, self.r1_off);
        AffineMatrixExpr::from_entries(p, self.n_new, |r, c| alloc::vec![(off + c * p + r, 1.0)])
    }

    pub fn r2(&self) -> AffineMatrixExpr {
        let (p, off) = (self.p, self.r2_off);
        AffineMatrixExpr::from_entries(p, self.a1, |r, c| alloc::vec![(off + c * p + r, 1.0)])
    }

    pub fn mu(&self) -> AffineMatrixExpr {
        let off = self.mu_off;
        AffineMatrixExpr::from_entries(1, 1, |_, _| alloc::vec![(off, 1.0)])
    }

    pub fn z_block(&self, b: &ZBlock) -> AffineMatrixExpr {
        sym_var(self.n_bar, b.offset)
    }

    /// The full structured `Z`: each upper-grid block is its own symmetric
    /// variable and appears transposed (equal, being symmetric) below.
    pub fn z(&self) -> AffineMatrixExpr {
        let k = self.m * self.n_bar;
        let nb = self.n_bar;
        let lookup = |row: usize, col: usize| {
            let (r, c) = if row <= col { (row, col) } else { (col, row) };
            self.z_blocks.iter().find(|b| b.row == r && b.col == c).expect("block exists").offset
        };
        AffineMatrixExpr::from_entries(k * nb, k * nb, |r, c| {
            let off = lookup(r / nb, c / nb);
            alloc::vec![(off + sym_index(r % nb, c % nb), 1.0)]
        })
    }

    pub fn var_names(&self) -> Vec<String> {
        let mut names = alloc::vec![String::new(); self.n_vars()];
        for c in 0..self.n_new {
            for r in 0..=c {
                names[self.p1_off + sym_index(r, c)] = format!("P1[{r},{c}]");
            }
        }
        for c in 0..self.a1 {
            for r in 0..=c {
                names[self.p2_off + sym_index(r, c)] = format!("P2[{r},{c}]");
            }
        }
        for c in 0..self.n_new {
            for r in 0..self.p {
                names[self.r1_off + c * self.p + r] = format!("R1[{r},{c}]");
            }
        }
        for c in 0..self.a1 {
            for r in 0..self.p {
                names[self.r2_off + c * self.p + r] = format!("R2[{r},{c}]");
            }
        }
        for b in &self.z_blocks {
            for c in 0..self.n_bar {
                for r in 0..=c {
                    names[b.offset + sym_index(r, c)] = format!("Z({},{})[{r},{c}]", b.row, b.col);
                }
            }
        }
        names[self.mu_off] = "mu".into();
        names
    }

    pub fn unpack(&self, x: &[f64]) -> Assignment {
        Assignment {
            p1: self.p1().eval(x),
            p2: self.p2().eval(x),
            r1: self.r1().eval(x),
            r2: self.r2().eval(x),
            z: self.z().eval(x),
            mu: x[self.mu_off],
        }
    }

    /// Inverse of [`DecisionLayout::unpack`] for matrices honoring the structure.
    pub fn pack(&self, a: &Assignment) -> Vec<f64> {
        let mut x = alloc::vec![0.0; self.n_vars()];
        for c in 0..self.n_new {
            for r in 0..=c {
                x[self.p1_off + sym_index(r, c)] = a.p1[(r, c)];
            }
        }
        for c in 0..self.a1 {
            for r in 0..=c {
                x[self.p2_off + sym_index(r, c)] = a.p2[(r, c)];
            }
        }
        for c in 0..self.n_new {
            for r in 0..self.p {
                x[self.r1_off + c * self.p + r] = a.r1[(r, c)];
            }
        }
        for c in 0..self.a1 {
            for r in 0..self.p {
                x[self.r2_off + c * self.p + r] = a.r2[(r, c)];
            }
        }
        let nb = self.n_bar;
        for b in &self.z_blocks {
            for c in 0..nb {
                for r in 0..=c {
                    x[b.offset + sym_index(r, c)] = a.z[(b.row * nb + r, b.col * nb + c)];
                }
            }
        }
        x[self.mu_off] = a.mu;
        x
    }
}

/// Values of the decision matrices at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub p1: DMatrix<f64>,
    pub p2: DMatrix<f64>,
    pub r1: DMatrix<f64>,
    pub r2: DMatrix<f64>,
    pub z: DMatrix<f64>,
    pub mu: f64,
}
