//! Vertex-expanded synthesis LMIs as affine matrix expressions, and their
//! lowering to a conic program.

pub mod affine;
pub mod blocks;
pub mod cone;
pub mod layout;

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

pub use affine::AffineMatrixExpr;
pub use blocks::{
    assemble_blocks, assemble_thm1, assemble_thm2, build_blocks, build_h_phi, build_m_n, build_sigma11, build_x,
    build_x_h_phi, build_z, sigma_q1, sigma_q_thm1, sigma_q_thm2, LmiBlocks, Theorem,
};
pub use cone::{lower_to_cone, smat, svec, ConeBlock, ConeKind, ConeProgram, Constraint, Sense};
pub use layout::{Assignment, DecisionLayout, FixedScalars, ZBlock, ZBlockKind};

use crate::error::Result;
use crate::model::DescriptorModel;
use crate::polytope::VertexSet;

/// Margin realizing strict definiteness: `X > 0` becomes `X >= 1e-6 I`.
pub const STRICT_MARGIN: f64 = 1e-6;

/// A complete synthesis problem: one NSD constraint per vertex plus the
/// definiteness constraints on `P1`, `P2` and `Z`.
#[derive(Debug, Clone)]
pub struct LmiProblem {
    pub theorem: Theorem,
    pub layout: DecisionLayout,
    pub vertices: VertexSet,
    pub blocks: Vec<LmiBlocks>,
    pub vertex_constraints: Vec<AffineMatrixExpr>,
    pub definiteness: Vec<Constraint>,
}

impl LmiProblem {
    pub fn build(
        desc: &DescriptorModel,
        l1: &DMatrix<f64>,
        f: Option<&DMatrix<f64>>,
        vertices: VertexSet,
        theorem: Theorem,
        fixed: FixedScalars,
    ) -> Result<Self> {
        let layout = DecisionLayout::new(desc.n_new, desc.a1, desc.p, desc.m(), desc.n_bar(), fixed);
        let mut blocks = Vec::with_capacity(vertices.len());
        let mut vertex_constraints = Vec::with_capacity(vertices.len());
        for v in &vertices.vertices {
            let b = build_blocks(desc, l1, f, &layout, v, theorem)?;
            vertex_constraints.push(assemble_blocks(&b, &layout, desc, theorem)?);
            blocks.push(b);
        }
        let mut definiteness = alloc::vec![
            Constraint { name: "P1".into(), expr: layout.p1(), sense: Sense::AtLeast(STRICT_MARGIN) },
            Constraint { name: "P2".into(), expr: layout.p2(), sense: Sense::AtLeast(STRICT_MARGIN) },
        ];
        if layout.z_dim() > 0 {
            for zb in &layout.z_blocks {
                let margin = if zb.kind == ZBlockKind::Diagonal { STRICT_MARGIN } else { 0.0 };
                definiteness.push(Constraint {
                    name: format!("Z({},{})", zb.row, zb.col),
                    expr: layout.z_block(zb),
                    sense: Sense::AtLeast(margin),
                });
            }
            definiteness.push(Constraint { name: "Z".into(), expr: layout.z(), sense: Sense::AtLeast(STRICT_MARGIN) });
        }
        Ok(Self { theorem, layout, vertices, blocks, vertex_constraints, definiteness })
    }

    /// All constraints in cone order: vertices first, then definiteness.
    pub fn constraints(&self) -> Vec<Constraint> {
        let mut out: Vec<Constraint> = self
            .vertex_constraints
            .iter()
            .enumerate()
            .map(|(k, e)| Constraint { name: format!("vertex{k}"), expr: e.clone(), sense: Sense::NegSemidefinite })
            .collect();
        out.extend(self.definiteness.iter().cloned());
        out
    }

    /// Minimize `mu` subject to every constraint and `mu >= 0`.
    pub fn to_cone_program(&self) -> Result<ConeProgram> {
        let mut objective = alloc::vec![0.0; self.layout.n_vars()];
        objective[self.layout.mu_index()] = 1.0;
        lower_to_cone(&self.constraints(), &objective, &[self.layout.mu_index()], self.layout.var_names())
    }

    pub fn constraint_size(&self) -> usize {
        self.vertex_constraints.first().map_or(0, |c| c.nrows())
    }
}
