//! Plant and descriptor data model, structural checks and the descriptor
//! augmentation `T zeta' = A_zeta zeta + B u`, `y = C_bar zeta + D w`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{check_shape, Error, Result};
use crate::linalg::{self, hstack, vstack, RANK_RTOL};

/// Eigenvalues with real part below this are treated as stable in PBH tests.
pub const STABLE_MARGIN: f64 = -1e-12;

/// The vector nonlinearity `g(x) = [g_1(H_1 x), ..., g_m(H_m x)]`.
///
/// `args[i]` holds `H_i x`. Implementations must be deterministic.
pub trait Nonlinearity: Send + Sync {
    fn m(&self) -> usize;
    fn eval(&self, args: &[DVector<f64>]) -> DVector<f64>;
}

/// Matrices describing the physical plant. Optional disturbance channels are
/// given as zero-column matrices when absent.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub e_f: DMatrix<f64>,
    pub d_f: DMatrix<f64>,
    pub e1: DMatrix<f64>,
    pub d1: DMatrix<f64>,
    pub h: Vec<DMatrix<f64>>,
    pub lipschitz_bounds: DMatrix<f64>,
}

impl PlantModel {
    /// Checks every shape against `A`, `C` and `G` and returns the model.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        g: DMatrix<f64>,
        e_f: DMatrix<f64>,
        d_f: DMatrix<f64>,
        e1: Option<DMatrix<f64>>,
        d1: Option<DMatrix<f64>>,
        h: Vec<DMatrix<f64>>,
        lipschitz_bounds: DMatrix<f64>,
    ) -> Result<Self> {
        let n = a.nrows();
        check_shape("A", &a, n, n)?;
        let p = c.nrows();
        check_shape("B", &b, n, b.ncols())?;
        check_shape("C", &c, p, n)?;
        let m = g.ncols();
        check_shape("G", &g, n, m)?;
        check_shape("E_f", &e_f, n, e_f.ncols())?;
        check_shape("D_f", &d_f, p, d_f.ncols())?;
        let e1 = e1.unwrap_or_else(|| DMatrix::zeros(n, 0));
        let d1 = d1.unwrap_or_else(|| DMatrix::zeros(p, 0));
        check_shape("E1", &e1, n, e1.ncols())?;
        check_shape("D1", &d1, p, d1.ncols())?;
        if h.len() != m {
            return Err(Error::Dimension {
                field: "H (count)".into(),
                expected: (m, 1),
                found: (h.len(), 1),
            });
        }
        let n_bar = h.first().map_or(0, |h0| h0.nrows());
        for (i, hi) in h.iter().enumerate() {
            check_shape(&format!("H[{i}]"), hi, n_bar, n)?;
        }
        check_shape("lipschitz_bounds", &lipschitz_bounds, m, n_bar)?;
        if let Some(v) = lipschitz_bounds.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidValue {
                field: "lipschitz_bounds".into(),
                reason: format!("entries must be finite and >= 0, found {v}"),
            });
        }
        for (name, mat) in [("A", &a), ("B", &b), ("C", &c), ("G", &g), ("E_f", &e_f), ("D_f", &d_f)] {
            if !linalg::all_finite(mat) {
                return Err(Error::NonFinite(name.into()));
            }
        }
        Ok(Self { a, b, c, g, e_f, d_f, e1, d1, h, lipschitz_bounds })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    pub fn p(&self) -> usize {
        self.c.nrows()
    }
    pub fn s(&self) -> usize {
        self.b.ncols()
    }
    pub fn m(&self) -> usize {
        self.g.ncols()
    }
    pub fn n_bar(&self) -> usize {
        self.lipschitz_bounds.ncols()
    }
    pub fn a1(&self) -> usize {
        self.e_f.ncols()
    }
    pub fn a2(&self) -> usize {
        self.d_f.ncols()
    }
    pub fn q1(&self) -> usize {
        self.e1.ncols()
    }
    pub fn q2(&self) -> usize {
        self.d1.ncols()
    }

    /// The same plant with disturbance channels removed.
    pub fn without_disturbances(&self) -> Self {
        let mut out = self.clone();
        out.e1 = DMatrix::zeros(self.n(), 0);
        out.d1 = DMatrix::zeros(self.p(), 0);
        out
    }
}

/// Descriptor form of the plant with the sensor fault appended to the state.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorModel {
    pub t: DMatrix<f64>,
    pub a_zeta: DMatrix<f64>,
    pub c_bar: DMatrix<f64>,
    /// `[E1 0]`, width `q = q1 + q2`.
    pub e: DMatrix<f64>,
    /// `[0 D1]`, width `q = q1 + q2`.
    pub d: DMatrix<f64>,
    pub n_new: usize,
    pub n_a1: usize,
    pub q: usize,
    pub n: usize,
    pub p: usize,
    pub a1: usize,
    pub a2: usize,
    pub e_f: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub h: Vec<DMatrix<f64>>,
}

impl DescriptorModel {
    pub fn m(&self) -> usize {
        self.g.ncols()
    }
    pub fn n_bar(&self) -> usize {
        self.h.first().map_or(0, |h| h.nrows())
    }
}

pub fn augment_descriptor(plant: &PlantModel) -> DescriptorModel {
    let (n, p, a1, a2) = (plant.n(), plant.p(), plant.a1(), plant.a2());
    let (q1, q2) = (plant.q1(), plant.q2());
    let q = q1 + q2;
    let mut t = DMatrix::zeros(n, n + a2);
    t.view_mut((0, 0), (n, n)).fill_with_identity();
    let a_zeta = hstack(&[&plant.a, &DMatrix::zeros(n, a2)]);
    let c_bar = hstack(&[&plant.c, &plant.d_f]);
    let e = hstack(&[&plant.e1, &DMatrix::zeros(n, q2)]);
    let d = hstack(&[&DMatrix::zeros(p, q1), &plant.d1]);
    DescriptorModel {
        t,
        a_zeta,
        c_bar,
        e,
        d,
        n_new: n + a2,
        n_a1: n + a2 + a1,
        q,
        n,
        p,
        a1,
        a2,
        e_f: plant.e_f.clone(),
        b: plant.b.clone(),
        g: plant.g.clone(),
        h: plant.h.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Named pass/fail verdicts with a short detail each.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConditionReport {
    pub checks: Vec<Check>,
}

impl ConditionReport {
    pub fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: ConditionReport) {
        self.checks.extend(other.checks);
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "[{tag}] {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex<f64>> {
    m.map(|v| Complex::new(v, 0.0))
}

/// PBH detectability of `(a, c)`: `rank [a - lambda I; c] = n` at every
/// eigenvalue with nonnegative real part. Returns the first failing eigenvalue.
pub fn pbh_detectable(a: &DMatrix<f64>, c: &DMatrix<f64>) -> core::result::Result<(), Complex<f64>> {
    let n = a.nrows();
    let cc = to_complex(c);
    for lam in linalg::eigenvalues(a) {
        if lam.re < STABLE_MARGIN {
            continue;
        }
        let mut shifted = to_complex(a);
        for k in 0..n {
            shifted[(k, k)] -= lam;
        }
        let mut stacked = DMatrix::zeros(n + c.nrows(), n);
        stacked.view_mut((0, 0), (n, n)).copy_from(&shifted);
        stacked.view_mut((n, 0), cc.shape()).copy_from(&cc);
        if linalg::rank_complex(&stacked, RANK_RTOL) < n {
            return Err(lam);
        }
    }
    Ok(())
}

/// Rank conditions required by the observer: detectability of
/// `(L1 A_zeta, C_bar)` and the zero-at-origin rank of
/// `[L1 A_zeta, L1 E_f; C_bar, 0]`.
pub fn check_existence_conditions(desc: &DescriptorModel, l1: &DMatrix<f64>) -> Result<ConditionReport> {
    check_shape("L1", l1, desc.n_new, desc.n)?;
    let mut report = ConditionReport::default();
    let la = l1 * &desc.a_zeta;
    match pbh_detectable(&la, &desc.c_bar) {
        Ok(()) => report.push("rank-detectability", true, "(L1 A_zeta, C_bar) detectable"),
        Err(lam) => report.push(
            "rank-detectability",
            false,
            format!("PBH rank drop at lambda = {:.6}{:+.6}i", lam.re, lam.im),
        ),
    }
    let top = hstack(&[&la, &(l1 * &desc.e_f)]);
    let bottom = hstack(&[&desc.c_bar, &DMatrix::zeros(desc.p, desc.a1)]);
    let stacked = vstack(&[&top, &bottom]);
    let r = linalg::rank(&stacked, RANK_RTOL);
    report.push(
        "rank-no-zero-at-origin",
        r == desc.n_a1,
        format!("rank = {r}, required {}", desc.n_a1),
    );
    Ok(report)
}

/// Detectability of `(A, C)` and full column rank of `E_f`, `D_f`.
pub fn validate_assumptions(plant: &PlantModel) -> ConditionReport {
    let mut report = ConditionReport::default();
    match pbh_detectable(&plant.a, &plant.c) {
        Ok(()) => report.push("assumption-1-detectable", true, "(A, C) detectable"),
        Err(lam) => report.push(
            "assumption-1-detectable",
            false,
            format!("(A, C) loses rank at lambda = {:.6}{:+.6}i", lam.re, lam.im),
        ),
    }
    for (name, m) in [("assumption-2-E_f-full-rank", &plant.e_f), ("assumption-2-D_f-full-rank", &plant.d_f)] {
        let r = linalg::rank(m, RANK_RTOL);
        report.push(name, r == m.ncols(), format!("rank = {r}, columns = {}", m.ncols()));
    }
    report
}
