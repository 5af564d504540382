//! Blocks of the vertex-expanded H-infinity LMIs and their assembly.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::affine::AffineMatrixExpr as Ax;
use super::layout::DecisionLayout;
use crate::error::{check_shape, Error, Result};
use crate::model::DescriptorModel;
use crate::polytope::basis;

/// Which synthesis LMI to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    /// Disturbance-free design.
    One,
    /// Design with process and measurement disturbances.
    Two,
}

/// Every block of one vertex constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiBlocks {
    pub sigma11: Ax,
    pub m: Ax,
    pub n: Ax,
    pub x: Ax,
    pub h_phi: DMatrix<f64>,
    pub sigma_q: Ax,
    pub sigma_q1: Option<Ax>,
    pub l1: DMatrix<f64>,
}

/// `[P1 L1 A_zeta + (.)^T - R1^T C_bar - C_bar^T R1, P1 L1 E_f - (R2^T C_bar L1 A_zeta)^T - (R2^T C_bar)^T;
///   *, -R2^T C_bar L1 E_f - (.)^T] + I`.
pub fn build_sigma11(desc: &DescriptorModel, l1: &DMatrix<f64>, layout: &DecisionLayout) -> Result<Ax> {
    check_shape("L1", l1, desc.n_new, desc.n)?;
    let p1 = layout.p1();
    let r1 = layout.r1();
    let r2t = layout.r2().transpose();
    let la = l1 * &desc.a_zeta;
    let le = l1 * &desc.e_f;
    let s11 = &p1.rmul(&la).herm() - &r1.transpose().rmul(&desc.c_bar).herm();
    let r2c = r2t.rmul(&desc.c_bar);
    let s12 = &(&p1.rmul(&le) - &r2c.rmul(&la).transpose()) - &r2c.transpose();
    let s22 = -r2c.rmul(&le).herm();
    let sigma = Ax::sym_blocks(&[vec![s11, s12], vec![s22]]);
    Ok(&sigma + &Ax::identity(desc.n_a1))
}

/// `M = [0, C_bar^T R2]` and `N = [R1^T C_bar, 0]`, both `n_new x n_a1`, so
/// that the LMI slot holds `(M + eps N)^T = [eps C_bar^T R1; R2^T C_bar]`.
pub fn build_m_n(desc: &DescriptorModel, layout: &DecisionLayout) -> (Ax, Ax) {
    let ct_r2 = layout.r2().lmul(&desc.c_bar.transpose());
    let m = Ax::hstack(&[Ax::zeros(desc.n_new, desc.n_new), ct_r2]);
    let r1t_c = layout.r1().transpose().rmul(&desc.c_bar);
    let n = Ax::hstack(&[r1t_c, Ax::zeros(desc.n_new, desc.a1)]);
    (m, n)
}

/// Stacked `X` with rows `X_ij`, `X_ij^T = [P1 L1 G H_ij; -R2^T C_bar L1 G H_ij]`,
/// ordered by `i` then `j`.
pub fn build_x(desc: &DescriptorModel, l1: &DMatrix<f64>, layout: &DecisionLayout) -> Result<Ax> {
    let (m, nb) = (desc.m(), desc.n_bar());
    let p1 = layout.p1();
    let r2c = layout.r2().transpose().rmul(&desc.c_bar);
    let mut rows = Vec::with_capacity(m * nb);
    for i in 1..=m {
        for j in 1..=nb {
            let hij = basis(i, j, m, nb)?.matrix;
            let lgh = l1 * &desc.g * &hij;
            let xt = Ax::vstack(&[p1.rmul(&lgh), -r2c.rmul(&lgh)]);
            rows.push(xt.transpose());
        }
    }
    if rows.is_empty() {
        return Ok(Ax::zeros(0, desc.n_a1));
    }
    Ok(Ax::vstack(&rows))
}

/// `H Phi` at a vertex: rows `g_ij [H_i T, 0]` stacked in the order of `X`.
pub fn build_h_phi(desc: &DescriptorModel, vertex: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (m, nb) = (desc.m(), desc.n_bar());
    check_shape("vertex", vertex, m, nb)?;
    let mut out = DMatrix::zeros(m * nb * nb, desc.n_a1);
    for i in 0..m {
        let hi_t = &desc.h[i] * &desc.t;
        for j in 0..nb {
            let r0 = (i * nb + j) * nb;
            out.view_mut((r0, 0), (nb, desc.n_new)).copy_from(&(&hi_t * vertex[(i, j)]));
        }
    }
    Ok(out)
}

pub fn build_x_h_phi(
    desc: &DescriptorModel,
    l1: &DMatrix<f64>,
    layout: &DecisionLayout,
    vertex: &DMatrix<f64>,
) -> Result<(Ax, DMatrix<f64>)> {
    Ok((build_x(desc, l1, layout)?, build_h_phi(desc, vertex)?))
}

pub fn build_z(layout: &DecisionLayout) -> Ax {
    layout.z()
}

/// Disturbance column without disturbances: `[0; beta^{-1} P2]`.
pub fn sigma_q_thm1(desc: &DescriptorModel, layout: &DecisionLayout) -> Ax {
    Ax::vstack(&[Ax::zeros(desc.n_new, desc.a1), layout.p2().scale(1.0 / layout.fixed.beta)])
}

/// `[P1 L1 E - R1^T D, -P1 F D, 0; -R2^T C_bar L1 E - R2^T D, R2^T C_bar F D - R2^T D, beta^{-1} P2]`.
pub fn sigma_q_thm2(desc: &DescriptorModel, l1: &DMatrix<f64>, f: &DMatrix<f64>, layout: &DecisionLayout) -> Ax {
    let p1 = layout.p1();
    let r1t = layout.r1().transpose();
    let r2t = layout.r2().transpose();
    let le = l1 * &desc.e;
    let fd = f * &desc.d;
    let r2c = r2t.rmul(&desc.c_bar);
    let top = vec![
        &p1.rmul(&le) - &r1t.rmul(&desc.d),
        -p1.rmul(&fd),
        Ax::zeros(desc.n_new, desc.a1),
    ];
    let bottom = vec![
        &(-r2c.rmul(&le)) - &r2t.rmul(&desc.d),
        &r2c.rmul(&fd) - &r2t.rmul(&desc.d),
        layout.p2().scale(1.0 / layout.fixed.beta),
    ];
    Ax::blocks(&[top, bottom])
}

/// `(U + delta P1 V)^T`, an `(n_a1 + 2q + a1) x n_new` column. It bounds the
/// cross term `R2^T C_bar K D` between the `f_a` rows and the `w` columns:
/// the `a1` rows carry `R2^T C_bar` and the `w` rows carry `delta D^T R1`.
pub fn sigma_q1(desc: &DescriptorModel, layout: &DecisionLayout, delta: f64) -> Ax {
    let r2c = layout.r2().transpose().rmul(&desc.c_bar);
    let dt_r1 = layout.r1().lmul(&desc.d.transpose()).scale(delta);
    Ax::vstack(&[
        Ax::zeros(desc.n_new, desc.n_new),
        r2c,
        dt_r1,
        Ax::zeros(desc.q + desc.a1, desc.n_new),
    ])
}

pub fn build_blocks(
    desc: &DescriptorModel,
    l1: &DMatrix<f64>,
    f: Option<&DMatrix<f64>>,
    layout: &DecisionLayout,
    vertex: &DMatrix<f64>,
    theorem: Theorem,
) -> Result<LmiBlocks> {
    let (m, n) = build_m_n(desc, layout);
    let (x, h_phi) = build_x_h_phi(desc, l1, layout, vertex)?;
    let (sigma_q, sigma_q1) = match theorem {
        Theorem::One => (sigma_q_thm1(desc, layout), None),
        Theorem::Two => {
            let f = f.ok_or_else(|| Error::InvalidValue { field: "F".into(), reason: "required by the disturbance LMI".into() })?;
            check_shape("F", f, desc.n_new, desc.p)?;
            let delta = positive(layout.fixed.delta, "delta")?;
            (sigma_q_thm2(desc, l1, f, layout), Some(sigma_q1(desc, layout, delta)))
        }
    };
    Ok(LmiBlocks { sigma11: build_sigma11(desc, l1, layout)?, m, n, x, h_phi, sigma_q, sigma_q1, l1: l1.clone() })
}

fn positive(v: Option<f64>, name: &str) -> Result<f64> {
    match v {
        Some(v) if v > 0.0 && v.is_finite() => Ok(v),
        Some(v) => Err(Error::InvalidValue { field: name.into(), reason: alloc::format!("must be > 0, got {v}") }),
        None => Err(Error::InvalidValue { field: name.into(), reason: "missing".into() }),
    }
}

fn check_fixed(layout: &DecisionLayout) -> Result<f64> {
    positive(Some(layout.fixed.beta), "beta")?;
    positive(Some(layout.fixed.epsilon), "epsilon")
}

fn assemble(blocks: &LmiBlocks, layout: &DecisionLayout, desc: &DescriptorModel, theorem: Theorem) -> Result<Ax> {
    let eps = check_fixed(layout)?;
    let (n_a1, n_new, kz) = (desc.n_a1, desc.n_new, layout.z_dim());
    let w = blocks.sigma_q.ncols();
    let mu = layout.mu_index();
    let mu_i = Ax::from_entries(w, w, |r, cc| if r == cc { vec![(mu, -1.0)] } else { vec![] });
    let mn_t = (&blocks.m + &blocks.n.scale(eps)).transpose();
    let z = layout.z();
    let xz_t = (&blocks.x + &z.rmul(&blocks.h_phi)).transpose();
    let mut rows = vec![
        vec![blocks.sigma11.clone(), mn_t, xz_t, blocks.sigma_q.clone()],
        vec![layout.p1().scale(-2.0 * eps), Ax::zeros(n_new, kz), Ax::zeros(n_new, w)],
        vec![z.scale(-2.0), Ax::zeros(kz, w)],
        vec![mu_i],
    ];
    if theorem == Theorem::Two {
        let delta = positive(layout.fixed.delta, "delta")?;
        let q1 = blocks.sigma_q1.as_ref().expect("disturbance blocks built");
        let top = q1.rows_range(0, n_a1);
        let bottom = q1.rows_range(n_a1, n_a1 + w);
        rows[0].push(top);
        rows[1].push(Ax::zeros(n_new, n_new));
        rows[2].push(Ax::zeros(kz, n_new));
        rows[3].push(bottom);
        rows.push(vec![layout.p1().scale(-2.0 * delta)]);
    }
    let out = Ax::sym_blocks(&rows);
    let asym = out.asymmetry();
    if asym > 1e-10 {
        return Err(Error::Asymmetric { residual: asym });
    }
    Ok(out)
}

/// Disturbance-free vertex constraint, size `n_a1 + n_new + m nbar nbar + a1`.
pub fn assemble_thm1(desc: &DescriptorModel, l1: &DMatrix<f64>, layout: &DecisionLayout, vertex: &DMatrix<f64>) -> Result<Ax> {
    let blocks = build_blocks(desc, l1, None, layout, vertex, Theorem::One)?;
    assemble(&blocks, layout, desc, Theorem::One)
}

/// Disturbance vertex constraint, size `n_a1 + n_new + m nbar nbar + (2q + a1) + n_new`.
pub fn assemble_thm2(
    desc: &DescriptorModel,
    l1: &DMatrix<f64>,
    f: &DMatrix<f64>,
    layout: &DecisionLayout,
    vertex: &DMatrix<f64>,
) -> Result<Ax> {
    let blocks = build_blocks(desc, l1, Some(f), layout, vertex, Theorem::Two)?;
    assemble(&blocks, layout, desc, Theorem::Two)
}

pub fn assemble_blocks(blocks: &LmiBlocks, layout: &DecisionLayout, desc: &DescriptorModel, theorem: Theorem) -> Result<Ax> {
    assemble(blocks, layout, desc, theorem)
}
