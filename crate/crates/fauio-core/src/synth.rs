//! Observer gain recovery from an LMI solution and design certification.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{check_shape, Error, Result};
use crate::linalg::{self, hstack, vstack, PINV_RCOND, RANK_RTOL};
use crate::lmi::Assignment;
use crate::model::{check_existence_conditions, ConditionReport, DescriptorModel};
use crate::polytope::{basis, VertexSet};

/// Tolerance on `||L1 T + F C_bar - I||_F`.
pub const UIO_RESIDUAL_TOL: f64 = 1e-8;

/// The runnable observer
/// `eta' = N eta + J y + L1 B u + L1 G g(T zeta_hat) + L1 E_f fa_hat`,
/// `zeta_hat = eta + F y`, `fa_hat' = beta L2 (y_tilde + y_tilde')`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverGains {
    pub n: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub l1: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub k: DMatrix<f64>,
    pub l2: DMatrix<f64>,
    pub beta: f64,
}

/// `L1 = [T; C_bar]^+ [I; 0]`, `F = [T; C_bar]^+ [0; I]` and the residual of
/// `L1 T + F C_bar = I`.
pub fn compute_l1_f(desc: &DescriptorModel) -> Result<(DMatrix<f64>, DMatrix<f64>, f64)> {
    let (n, p, nn) = (desc.n, desc.p, desc.n_new);
    let stack = vstack(&[&desc.t, &desc.c_bar]);
    let r = linalg::rank(&stack, RANK_RTOL);
    if r < nn {
        return Err(Error::UioUnsolvable { rank: r, needed: nn });
    }
    let pinv = linalg::pinv(&stack, PINV_RCOND);
    let l1 = pinv.columns(0, n).into_owned();
    let f = pinv.columns(n, p).into_owned();
    let residual = uio_residual(desc, &l1, &f);
    if residual > UIO_RESIDUAL_TOL {
        return Err(Error::UioUnsolvable { rank: r, needed: nn });
    }
    Ok((l1, f, residual))
}

pub fn uio_residual(desc: &DescriptorModel, l1: &DMatrix<f64>, f: &DMatrix<f64>) -> f64 {
    (l1 * &desc.t + f * &desc.c_bar - DMatrix::identity(desc.n_new, desc.n_new)).norm()
}

/// `K = P1^{-1} R1^T`, `L2 = P2^{-1} R2^T`, `N = L1 A_zeta - K C_bar`, `J = N F + K`.
pub fn recover_gains(
    assignment: &Assignment,
    desc: &DescriptorModel,
    l1: &DMatrix<f64>,
    f: &DMatrix<f64>,
    beta: f64,
) -> Result<ObserverGains> {
    check_shape("L1", l1, desc.n_new, desc.n)?;
    check_shape("F", f, desc.n_new, desc.p)?;
    let k = solve_spd(&assignment.p1, &assignment.r1.transpose(), "P1")?;
    let l2 = solve_spd(&assignment.p2, &assignment.r2.transpose(), "P2")?;
    Ok(gains_from_k(desc, l1, f, k, l2, beta))
}

/// Builds `N` and `J` from given `K` and `L2`.
pub fn gains_from_k(
    desc: &DescriptorModel,
    l1: &DMatrix<f64>,
    f: &DMatrix<f64>,
    k: DMatrix<f64>,
    l2: DMatrix<f64>,
    beta: f64,
) -> ObserverGains {
    let n = l1 * &desc.a_zeta - &k * &desc.c_bar;
    let j = &n * f + &k;
    ObserverGains { n, j, l1: l1.clone(), f: f.clone(), k, l2, beta }
}

fn solve_spd(p: &DMatrix<f64>, rhs: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    if p.nrows() == 0 {
        return Ok(DMatrix::zeros(0, rhs.ncols()));
    }
    let chol = p.clone().cholesky().ok_or_else(|| Error::Singular(name.into()))?;
    let out = chol.solve(rhs);
    if !linalg::all_finite(&out) {
        return Err(Error::Singular(name.into()));
    }
    Ok(out)
}

/// `T_e = [I 0; beta L2 C_bar I]`.
pub fn t_e(g: &ObserverGains, desc: &DescriptorModel) -> DMatrix<f64> {
    let (nn, a1) = (desc.n_new, desc.a1);
    let mut t = DMatrix::identity(nn + a1, nn + a1);
    t.view_mut((nn, 0), (a1, nn)).copy_from(&(&g.l2 * &desc.c_bar * g.beta));
    t
}

/// Closed-form inverse `[I 0; -beta L2 C_bar I]`.
pub fn t_e_inv(g: &ObserverGains, desc: &DescriptorModel) -> DMatrix<f64> {
    let (nn, a1) = (desc.n_new, desc.a1);
    let mut t = DMatrix::identity(nn + a1, nn + a1);
    t.view_mut((nn, 0), (a1, nn)).copy_from(&(&g.l2 * &desc.c_bar * -g.beta));
    t
}

/// `A_e = [N, L1 E_f; -beta L2 C_bar, 0]`.
pub fn a_e(g: &ObserverGains, desc: &DescriptorModel) -> DMatrix<f64> {
    let top = hstack(&[&g.n, &(&g.l1 * &desc.e_f)]);
    let bottom = hstack(&[&(&g.l2 * &desc.c_bar * -g.beta), &DMatrix::zeros(desc.a1, desc.a1)]);
    vstack(&[&top, &bottom])
}

/// Linear error matrix `T_e^{-1} A_e`.
pub fn a_e_tilde(g: &ObserverGains, desc: &DescriptorModel) -> DMatrix<f64> {
    t_e_inv(g, desc) * a_e(g, desc)
}

/// Error matrix at a vertex: `T_e^{-1} (A_e + sum g_ij [L1 G H_ij; 0][H_i T, 0])`.
pub fn vertex_matrix(g: &ObserverGains, desc: &DescriptorModel, vertex: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (m, nb, nn, a1) = (desc.m(), desc.n_bar(), desc.n_new, desc.a1);
    check_shape("vertex", vertex, m, nb)?;
    let mut nl = DMatrix::zeros(nn + a1, nn + a1);
    for i in 0..m {
        let hi_t = &desc.h[i] * &desc.t;
        for jj in 0..nb {
            let gij = vertex[(i, jj)];
            if gij == 0.0 {
                continue;
            }
            let hij = basis(i + 1, jj + 1, m, nb)?.matrix;
            let col = &g.l1 * &desc.g * &hij;
            let prod = col * &hi_t * gij;
            let mut v = nl.view_mut((0, 0), (nn, nn));
            v += &prod;
        }
    }
    Ok(t_e_inv(g, desc) * (a_e(g, desc) + nl))
}

/// Disturbance input of the error dynamics for `w_bar = [w; w'; fa']`.
pub fn e_omega(g: &ObserverGains, desc: &DescriptorModel) -> DMatrix<f64> {
    let (nn, a1) = (desc.n_new, desc.a1);
    let top = hstack(&[&(&g.l1 * &desc.e - &g.k * &desc.d), &(-(&g.f * &desc.d)), &DMatrix::zeros(nn, a1)]);
    let bl2d = &g.l2 * &desc.d * -g.beta;
    let bottom = hstack(&[&bl2d, &bl2d, &DMatrix::identity(a1, a1)]);
    t_e_inv(g, desc) * vstack(&[&top, &bottom])
}

/// Lyapunov weight `P = diag(P1, beta^{-1} P2)`.
pub fn lyapunov_p(a: &Assignment, beta: f64) -> DMatrix<f64> {
    linalg::block_diag(&[&a.p1, &(&a.p2 / beta)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport {
    pub vertex_abscissa: Vec<f64>,
    pub max_abscissa: f64,
    /// `lambda_max` of the dissipation matrix per vertex when a solution is given.
    pub dissipation: Vec<f64>,
    pub uio_residual: f64,
    pub p1_condition: Option<f64>,
    pub report: ConditionReport,
}

/// Hurwitz test of every vertex error matrix, the rank conditions and,
/// given a solved point, the dissipation inequality
/// `[A^T P + P A + I, P E_w; *, -mu I] <= 0` with the recovered gains.
pub fn certify_design(
    g: &ObserverGains,
    desc: &DescriptorModel,
    vertices: &VertexSet,
    solution: Option<&Assignment>,
    with_disturbance: bool,
) -> Result<DesignReport> {
    let mut report = ConditionReport::default();
    let uio_residual = uio_residual(desc, &g.l1, &g.f);
    report.push("uio-identity", uio_residual <= UIO_RESIDUAL_TOL, format!("||L1 T + F C_bar - I|| = {uio_residual:.3e}"));
    let mut vertex_abscissa = Vec::with_capacity(vertices.len());
    let mut dissipation = Vec::new();
    let ew = e_omega(g, desc);
    for v in &vertices.vertices {
        let av = vertex_matrix(g, desc, v)?;
        vertex_abscissa.push(linalg::spectral_abscissa(&av));
        if let Some(a) = solution {
            let p = lyapunov_p(a, g.beta);
            let nn = av.nrows();
            let lyap = av.transpose() * &p + &p * &av + DMatrix::identity(nn, nn);
            let m = if with_disturbance {
                let pe = &p * &ew;
                let w = pe.ncols();
                let top = hstack(&[&lyap, &pe]);
                let bottom = hstack(&[&pe.transpose(), &(DMatrix::identity(w, w) * -a.mu)]);
                vstack(&[&top, &bottom])
            } else {
                let pe = &p * ew.columns(ew.ncols() - desc.a1, desc.a1);
                let top = hstack(&[&lyap, &pe]);
                let bottom = hstack(&[&pe.transpose(), &(DMatrix::identity(desc.a1, desc.a1) * -a.mu)]);
                vstack(&[&top, &bottom])
            };
            dissipation.push(linalg::lambda_max(&m));
        }
    }
    let max_abscissa = vertex_abscissa.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    report.push(
        "vertex-hurwitz",
        max_abscissa < 0.0,
        format!("max real part over {} vertices = {max_abscissa:.6e}", vertices.len()),
    );
    if !dissipation.is_empty() {
        let worst = dissipation.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        report.push("dissipation", worst <= 1e-6, format!("worst lambda_max {worst:.3e}"));
    }
    report.extend(check_existence_conditions(desc, &g.l1)?);
    let p1_condition = solution.map(|a| {
        let e = linalg::sym_eigenvalues(&a.p1);
        e[e.len() - 1] / e[0]
    });
    Ok(DesignReport { vertex_abscissa, max_abscissa, dissipation, uio_residual, p1_condition, report })
}
