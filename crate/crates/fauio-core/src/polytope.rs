//! Reformulated Lipschitz machinery: basis matrices `H_ij`, the bound box,
//! its vertex set and sampling-based bound estimation and verification.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ConditionReport, Nonlinearity};

/// At most this many strictly positive bounds (2^16 vertices).
pub const MAX_FREE_ENTRIES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    pub i: usize,
    pub j: usize,
    pub matrix: DMatrix<f64>,
}

/// `e_m(i) e_nbar(j)^T` with 1-based indices.
pub fn basis(i: usize, j: usize, m: usize, n_bar: usize) -> Result<BasisMatrix> {
    if i == 0 || i > m {
        return Err(Error::IndexOutOfRange { index: i, bound: m });
    }
    if j == 0 || j > n_bar {
        return Err(Error::IndexOutOfRange { index: j, bound: n_bar });
    }
    let mut matrix = DMatrix::zeros(m, n_bar);
    matrix[(i - 1, j - 1)] = 1.0;
    Ok(BasisMatrix { i, j, matrix })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexSet {
    pub m: usize,
    pub n_bar: usize,
    pub vertices: Vec<DMatrix<f64>>,
    pub bounds: DMatrix<f64>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Row-major positions of the strictly positive bounds.
    pub fn free_entries(&self) -> Vec<(usize, usize)> {
        free_entries(&self.bounds)
    }

    /// Convex weights over the vertices reproducing `phi` (which must lie in
    /// the box). Each free entry contributes an independent two-point split.
    pub fn convex_weights(&self, phi: &DMatrix<f64>) -> Vec<f64> {
        let free = self.free_entries();
        let theta: Vec<f64> = free
            .iter()
            .map(|&(r, c)| (phi[(r, c)] / self.bounds[(r, c)]).clamp(0.0, 1.0))
            .collect();
        (0..self.vertices.len())
            .map(|k| {
                theta
                    .iter()
                    .enumerate()
                    .map(|(bit, &t)| if k >> bit & 1 == 1 { t } else { 1.0 - t })
                    .product()
            })
            .collect()
    }
}

fn free_entries(bounds: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..bounds.nrows() {
        for c in 0..bounds.ncols() {
            if bounds[(r, c)] > 0.0 {
                out.push((r, c));
            }
        }
    }
    out
}

/// All corners of `[0, bounds]`. Vertex `k` sets the free entry number `b`
/// (row-major) to its bound when bit `b` of `k` is set.
pub fn enumerate_vertices(bounds: &DMatrix<f64>) -> Result<VertexSet> {
    if let Some(v) = bounds.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidValue {
            field: "lipschitz_bounds".into(),
            reason: format!("entries must be finite and >= 0, found {v}"),
        });
    }
    let free = free_entries(bounds);
    if free.len() > MAX_FREE_ENTRIES {
        return Err(Error::VertexCap { positive: free.len(), cap: MAX_FREE_ENTRIES });
    }
    let vertices = (0..1usize << free.len())
        .map(|k| {
            let mut v = DMatrix::zeros(bounds.nrows(), bounds.ncols());
            for (bit, &(r, c)) in free.iter().enumerate() {
                if k >> bit & 1 == 1 {
                    v[(r, c)] = bounds[(r, c)];
                }
            }
            v
        })
        .collect();
    Ok(VertexSet { m: bounds.nrows(), n_bar: bounds.ncols(), vertices, bounds: bounds.clone() })
}

/// Box, sample count and finite-difference settings for bound estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub lower: f64,
    pub upper: f64,
    pub samples: usize,
    pub fd_step: f64,
    pub safety: f64,
    pub seed: u64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            lower: -core::f64::consts::FRAC_PI_2,
            upper: core::f64::consts::FRAC_PI_2,
            samples: 2000,
            fd_step: 1e-6,
            safety: 1.1,
            seed: 7,
        }
    }
}

fn sample_vec(rng: &mut ChaCha8Rng, len: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.random_range(lo..=hi))
}

/// Largest `|d g_i / d nu_ij|` over the sample stream, times `plan.safety`.
///
/// Sample `k` is the same whatever `plan.samples` is, so the estimate never
/// shrinks as the sample count grows.
pub fn estimate_bounds(g: &dyn Nonlinearity, n_bar: usize, plan: &SamplingPlan) -> Result<DMatrix<f64>> {
    let m = g.m();
    let mut out = DMatrix::<f64>::zeros(m, n_bar);
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let h = plan.fd_step;
    for _ in 0..plan.samples {
        let args: Vec<DVector<f64>> = (0..m).map(|_| sample_vec(&mut rng, n_bar, plan.lower, plan.upper)).collect();
        for i in 0..m {
            for j in 0..n_bar {
                let mut plus = args.clone();
                let mut minus = args.clone();
                plus[i][j] += h;
                minus[i][j] -= h;
                let d = (g.eval(&plus)[i] - g.eval(&minus)[i]) / (2.0 * h);
                if !d.is_finite() {
                    return Err(Error::NonFinite(format!("derivative of g_{} w.r.t. argument {}", i + 1, j + 1)));
                }
                out[(i, j)] = out[(i, j)].max(d.abs());
            }
        }
    }
    Ok(out * plan.safety)
}

/// Outcome of the telescoping secant check.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub trials: usize,
    pub violations: usize,
    /// Largest amount by which a secant coefficient left `[0, bound]`
    /// (negative when every coefficient is strictly inside).
    pub worst_margin: f64,
    /// Largest mismatch between `g_i(H_i X) - g_i(H_i Y)` and the telescoped sum.
    pub worst_identity_residual: f64,
}

impl DecompositionReport {
    pub fn to_report(&self) -> ConditionReport {
        let mut r = ConditionReport::default();
        r.push(
            "lipschitz-decomposition",
            self.violations == 0,
            format!(
                "{} violations over {} trials, worst margin {:.3e}, identity residual {:.3e}",
                self.violations, self.trials, self.worst_margin, self.worst_identity_residual
            ),
        );
        r
    }
}

/// Checks that `g(HX) - g(HY)` splits into secant coefficients in
/// `[0, bounds]` along the path that swaps one argument coordinate at a time.
/// `X`, `Y` are drawn uniformly from `[plan.lower, plan.upper]^n`.
pub fn verify_decomposition(
    g: &dyn Nonlinearity,
    h: &[DMatrix<f64>],
    bounds: &DMatrix<f64>,
    trials: usize,
    plan: &SamplingPlan,
) -> DecompositionReport {
    let m = g.m();
    let n = h.first().map_or(0, |h0| h0.ncols());
    let n_bar = bounds.ncols();
    let tol = 1e-9;
    let mut violations = 0;
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_identity = 0.0_f64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed.wrapping_add(trial as u64));
        let x = sample_vec(&mut rng, n, plan.lower, plan.upper);
        let y = sample_vec(&mut rng, n, plan.lower, plan.upper);
        let nu_x: Vec<DVector<f64>> = h.iter().map(|hi| hi * &x).collect();
        let nu_y: Vec<DVector<f64>> = h.iter().map(|hi| hi * &y).collect();
        let full = g.eval(&nu_x) - g.eval(&nu_y);
        let mut trial_bad = false;
        for i in 0..m {
            let mut telescoped = 0.0;
            let mut cur = nu_x.clone();
            for j in 0..n_bar {
                let before = g.eval(&cur)[i];
                cur[i][j] = nu_y[i][j];
                let after = g.eval(&cur)[i];
                let dz = nu_x[i][j] - nu_y[i][j];
                let step = before - after;
                telescoped += step;
                if dz.abs() < 1e-12 {
                    continue;
                }
                let coeff = step / dz;
                let b = bounds[(i, j)];
                let margin = (-coeff).max(coeff - b);
                worst_margin = worst_margin.max(margin);
                if margin > tol * (1.0 + b) {
                    trial_bad = true;
                }
            }
            worst_identity = worst_identity.max((telescoped - full[i]).abs());
        }
        if trial_bad {
            violations += 1;
        }
    }
    DecompositionReport { trials, violations, worst_margin, worst_identity_residual: worst_identity }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_unit_entry() {
        let b = basis(2, 3, 2, 3).unwrap();
        assert_eq!(b.matrix.iter().sum::<f64>(), 1.0);
        assert_eq!(b.matrix[(1, 2)], 1.0);
        assert!(basis(0, 1, 1, 1).is_err());
        assert!(basis(1, 5, 1, 4).is_err());
    }

    #[test]
    fn vertex_ordering() {
        let bounds = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        let vs = enumerate_vertices(&bounds).unwrap();
        assert_eq!(vs.len(), 4);
        assert_eq!(vs.vertices[0], DMatrix::zeros(2, 2));
        assert_eq!(vs.vertices[3], bounds);
        assert_eq!(vs.vertices[1][(0, 0)], 2.0);
        assert_eq!(vs.vertices[2][(1, 1)], 3.0);
    }

    #[test]
    fn cap_exceeded() {
        let bounds = DMatrix::from_element(1, 17, 1.0);
        assert!(matches!(enumerate_vertices(&bounds), Err(Error::VertexCap { positive: 17, .. })));
    }

    #[test]
    fn zero_bounds_single_vertex() {
        let vs = enumerate_vertices(&DMatrix::zeros(1, 4)).unwrap();
        assert_eq!(vs.len(), 1);
    }
}
