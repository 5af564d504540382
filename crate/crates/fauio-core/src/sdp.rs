//! Solver interface, solution type, certificate verification and the
//! search over the fixed scalars.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lmi::{Assignment, LmiProblem};
use crate::model::ConditionReport;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub max_iter: u32,
    pub tol_feas: f64,
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { max_iter: 200, tol_feas: 1e-8, tol_gap_abs: 1e-10, tol_gap_rel: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

impl core::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::NumericalFailure => "numerical-failure",
        })
    }
}

/// What a backend returns for a [`crate::lmi::ConeProgram`].
#[derive(Debug, Clone, PartialEq)]
pub struct RawSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub iterations: u32,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Backend's own termination label.
    pub detail: String,
}

/// A conic solver backend.
pub trait ConeSolver {
    fn solve(&self, program: &crate::lmi::ConeProgram, settings: &SolverSettings) -> RawSolution;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub mu: f64,
    pub sqrt_mu: f64,
    pub x: Vec<f64>,
    pub assignment: Assignment,
    pub iterations: u32,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub detail: String,
}

/// Lowers the problem, runs the backend and unpacks the decision matrices.
pub fn solve(problem: &LmiProblem, solver: &dyn ConeSolver, settings: &SolverSettings) -> Result<SdpSolution> {
    let program = problem.to_cone_program()?;
    let raw = solver.solve(&program, settings);
    let x = if raw.x.len() == program.n_vars { raw.x.clone() } else { alloc::vec![0.0; program.n_vars] };
    let assignment = problem.layout.unpack(&x);
    let mu = assignment.mu;
    Ok(SdpSolution {
        status: raw.status,
        mu,
        sqrt_mu: libm::sqrt(mu.max(0.0)),
        x,
        assignment,
        iterations: raw.iterations,
        primal_residual: raw.primal_residual,
        dual_residual: raw.dual_residual,
        detail: raw.detail,
    })
}

/// Acceptance tolerance `absolute + relative * ||constraint||_F` on `lambda_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateTolerance {
    pub absolute: f64,
    pub relative: f64,
}

impl Default for CertificateTolerance {
    fn default() -> Self {
        Self { absolute: 1e-7, relative: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexCheck {
    pub vertex: usize,
    pub lambda_max: f64,
    pub norm: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub vertices: Vec<VertexCheck>,
    pub lambda_min_p1: f64,
    pub lambda_min_p2: f64,
    pub lambda_min_z: f64,
    pub report: ConditionReport,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.report.all_passed()
    }

    pub fn worst_vertex(&self) -> Option<&VertexCheck> {
        self.vertices.iter().max_by(|a, b| {
            (a.lambda_max / a.norm.max(1e-300))
                .partial_cmp(&(b.lambda_max / b.norm.max(1e-300)))
                .unwrap_or(core::cmp::Ordering::Equal)
        })
    }
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        f64::INFINITY
    } else {
        linalg::lambda_min(m)
    }
}

/// Re-evaluates every vertex expression at the returned point and checks
/// `lambda_max <= tol`, plus positive definiteness of `P1`, `P2` and `Z`.
pub fn verify_certificate(problem: &LmiProblem, x: &[f64], tol: CertificateTolerance) -> CertificateReport {
    let a = problem.layout.unpack(x);
    let mut report = ConditionReport::default();
    let vertices: Vec<VertexCheck> = problem
        .vertex_constraints
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let m = e.eval(x);
            let lambda_max = linalg::lambda_max(&m);
            let norm = m.norm();
            let passed = lambda_max <= tol.absolute + tol.relative * norm;
            VertexCheck { vertex: k, lambda_max, norm, passed }
        })
        .collect();
    let bad = vertices.iter().filter(|v| !v.passed).count();
    let worst = vertices
        .iter()
        .map(|v| v.lambda_max)
        .fold(f64::NEG_INFINITY, f64::max);
    report.push(
        "vertex-lmi",
        bad == 0,
        format!("{} of {} vertices pass, worst lambda_max {:.3e}", vertices.len() - bad, vertices.len(), worst),
    );
    let (l1, l2, lz) = (min_eig(&a.p1), min_eig(&a.p2), min_eig(&a.z));
    report.push("P1-positive-definite", l1 > 0.0, format!("lambda_min {l1:.3e}"));
    report.push("P2-positive-definite", l2 > 0.0, format!("lambda_min {l2:.3e}"));
    report.push("Z-positive-definite", lz > 0.0, format!("lambda_min {lz:.3e}"));
    CertificateReport { vertices, lambda_min_p1: l1, lambda_min_p2: l2, lambda_min_z: lz, report }
}

/// One grid cell of [`scalar_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub status: SolveStatus,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: usize,
    pub table: Vec<GridPoint>,
}

impl SearchResult {
    pub fn best_point(&self) -> &GridPoint {
        &self.table[self.best]
    }
}

/// All `(epsilon, delta)` pairs in grid order. An empty delta list means the
/// problem does not use delta.
pub fn grid_points(epsilons: &[f64], deltas: &[f64]) -> Result<Vec<(f64, Option<f64>)>> {
    if epsilons.is_empty() {
        return Err(Error::InvalidValue { field: "grid".into(), reason: "empty epsilon list".into() });
    }
    let mut out = Vec::new();
    for &e in epsilons {
        if deltas.is_empty() {
            out.push((e, None));
        } else {
            for &d in deltas {
                out.push((e, Some(d)));
            }
        }
    }
    Ok(out)
}

/// Picks the optimal cell with the smallest `mu`; ties go to the smaller
/// epsilon, then the smaller delta.
pub fn select_best(table: Vec<GridPoint>) -> Result<SearchResult> {
    let mut best: Option<usize> = None;
    for (k, p) in table.iter().enumerate() {
        if p.status != SolveStatus::Optimal {
            continue;
        }
        best = match best {
            None => Some(k),
            Some(b) => {
                let q = &table[b];
                let key = |g: &GridPoint| (g.mu, g.epsilon, g.delta.unwrap_or(0.0));
                if key(p).partial_cmp(&key(q)) == Some(core::cmp::Ordering::Less) {
                    Some(k)
                } else {
                    Some(b)
                }
            }
        };
    }
    match best {
        Some(best) => Ok(SearchResult { best, table }),
        None => Err(Error::NoFeasiblePair),
    }
}

/// Sequential grid search; `solve_point` solves one `(epsilon, delta)` cell.
pub fn scalar_search(
    epsilons: &[f64],
    deltas: &[f64],
    mut solve_point: impl FnMut(f64, Option<f64>) -> Result<SdpSolution>,
) -> Result<SearchResult> {
    let mut table = Vec::new();
    for (e, d) in grid_points(epsilons, deltas)? {
        let sol = solve_point(e, d)?;
        table.push(GridPoint { epsilon: e, delta: d, status: sol.status, mu: sol.mu });
    }
    select_best(table)
}
