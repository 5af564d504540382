//! Interior-point backend for [`ConeProgram`] built on `clarabel`.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, PSDTriangleConeT, SolverStatus, SupportedConeT,
};
use fauio_core::lmi::{ConeKind, ConeProgram};
use fauio_core::sdp::{ConeSolver, RawSolution, SolveStatus, SolverSettings};

/// Both packings are the upper triangle, column by column, with off-diagonal
/// entries scaled by sqrt(2), so cone rows pass through unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClarabelSolver {
    pub verbose: bool,
}

fn map_status(s: SolverStatus) -> SolveStatus {
    match s {
        SolverStatus::Solved | SolverStatus::AlmostSolved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
        _ => SolveStatus::NumericalFailure,
    }
}

fn failure(detail: String) -> RawSolution {
    RawSolution {
        status: SolveStatus::NumericalFailure,
        x: Vec::new(),
        iterations: 0,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        detail,
    }
}

impl ConeSolver for ClarabelSolver {
    fn solve(&self, program: &ConeProgram, settings: &SolverSettings) -> RawSolution {
        let n = program.n_vars;
        let m = program.n_rows();
        let p = CscMatrix::zeros((n, n));
        let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
        for &(r, c, v) in &program.a {
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
        let a = CscMatrix::new_from_triplets(m, n, rows, cols, vals);
        let cones: Vec<SupportedConeT<f64>> = program
            .cones
            .iter()
            .map(|c| match c.kind {
                ConeKind::Psd(k) => PSDTriangleConeT(k),
                ConeKind::Nonnegative(k) => NonnegativeConeT(k),
            })
            .collect();
        let built = DefaultSettingsBuilder::default()
            .verbose(self.verbose)
            .max_iter(settings.max_iter)
            .tol_feas(settings.tol_feas)
            .tol_gap_abs(settings.tol_gap_abs)
            .tol_gap_rel(settings.tol_gap_rel)
            .build();
        let cfg = match built {
            Ok(c) => c,
            Err(e) => return failure(format!("settings: {e}")),
        };
        let mut solver = match DefaultSolver::new(&p, &program.objective, &a, &program.b, &cones, cfg) {
            Ok(s) => s,
            Err(e) => return failure(format!("setup: {e}")),
        };
        solver.solve();
        let sol = &solver.solution;
        RawSolution {
            status: map_status(sol.status),
            x: sol.x.clone(),
            iterations: sol.iterations,
            primal_residual: sol.r_prim,
            dual_residual: sol.r_dual,
            detail: format!("{:?}", sol.status),
        }
    }
}
