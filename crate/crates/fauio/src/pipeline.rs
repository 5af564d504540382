//! The validate, synthesize and simulate stages shared by the CLI and tests.

use fauio_core::lmi::{FixedScalars, LmiProblem, Theorem};
use fauio_core::model::{augment_descriptor, check_existence_conditions, validate_assumptions, ConditionReport};
use fauio_core::polytope::{enumerate_vertices, VertexSet};
use fauio_core::sdp::{self, CertificateReport, CertificateTolerance, ConeSolver, SdpSolution, SolveStatus, SolverSettings};
use fauio_core::synth::{certify_design, compute_l1_f, recover_gains, DesignReport, ObserverGains};
use fauio_core::linalg;
use fauio_core::model::{DescriptorModel, Nonlinearity, PlantModel};
use fauio_core::sim::metrics::SETTLING_BAND;
use fauio_core::sim::{
    hinf_check, integrate, rmse_full, settling_time, HInfCertificate, ScenarioConfig, Selector, Settling, Trajectory,
};
use fauio_core::{DMatrix, Error};

use crate::error::{AppError, AppResult};
use crate::matio::GainSet;

/// Assumptions, the UIO identity and the rank conditions.
pub fn validate(plant: &PlantModel) -> AppResult<ConditionReport> {
    let mut report = validate_assumptions(plant);
    let desc = augment_descriptor(plant);
    match compute_l1_f(&desc) {
        Ok((l1, _, residual)) => {
            report.push("uio-identity", true, format!("||L1 T + F C_bar - I|| = {residual:.3e}"));
            report.extend(check_existence_conditions(&desc, &l1)?);
        }
        Err(e @ Error::UioUnsolvable { .. }) => report.push("uio-identity", false, e.to_string()),
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub theorem: Theorem,
    pub fixed: FixedScalars,
    pub settings: SolverSettings,
    pub tolerance: CertificateTolerance,
}

impl SynthOptions {
    pub fn new(theorem: Theorem, fixed: FixedScalars) -> AppResult<Self> {
        if theorem == Theorem::Two && fixed.delta.is_none() {
            return Err(AppError::Usage("theorem 2 requires delta".into()));
        }
        Ok(Self { theorem, fixed, settings: SolverSettings::default(), tolerance: CertificateTolerance::default() })
    }
}

/// Everything produced by one synthesis run.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub desc: DescriptorModel,
    pub l1: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub problem: LmiProblem,
    pub solution: SdpSolution,
    pub certificate: CertificateReport,
    pub gains: ObserverGains,
    pub design: DesignReport,
}

impl Synthesis {
    /// Feasible, certified and every vertex Hurwitz.
    pub fn accepted(&self) -> bool {
        self.solution.status == SolveStatus::Optimal && self.certificate.passed() && self.design.max_abscissa < 0.0
    }
}

pub fn vertices_of(plant: &PlantModel) -> AppResult<VertexSet> {
    Ok(enumerate_vertices(&plant.lipschitz_bounds)?)
}

/// Solves one LMI instance and recovers and certifies the gains. An
/// infeasible or uncertified instance is an error carrying the worst vertex.
pub fn synthesize(plant: &PlantModel, opts: &SynthOptions, solver: &dyn ConeSolver) -> AppResult<Synthesis> {
    let out = solve_instance(plant, opts, solver)?;
    if out.solution.status != SolveStatus::Optimal {
        let worst = out
            .certificate
            .worst_vertex()
            .map(|v| format!("; worst vertex {} lambda_max {:.3e}", v.vertex, v.lambda_max))
            .unwrap_or_default();
        return Err(AppError::Infeasible(format!("solver status {} ({}){worst}", out.solution.status, out.solution.detail)));
    }
    Ok(out)
}

/// Like [`synthesize`] but returns the run whatever the solver status.
pub fn solve_instance(plant: &PlantModel, opts: &SynthOptions, solver: &dyn ConeSolver) -> AppResult<Synthesis> {
    let desc = augment_descriptor(plant);
    let (l1, f, _) = compute_l1_f(&desc)?;
    let vertices = vertices_of(plant)?;
    let problem = LmiProblem::build(&desc, &l1, Some(&f), vertices.clone(), opts.theorem, opts.fixed)?;
    let solution = sdp::solve(&problem, solver, &opts.settings)?;
    let certificate = sdp::verify_certificate(&problem, &solution.x, opts.tolerance);
    let gains = recover_gains(&solution.assignment, &desc, &l1, &f, opts.fixed.beta)?;
    let design = certify_design(&gains, &desc, &vertices, Some(&solution.assignment), opts.theorem == Theorem::Two)?;
    Ok(Synthesis { desc, l1, f, problem, solution, certificate, gains, design })
}

/// Grid search over `(epsilon, delta)` with cells solved in parallel.
pub fn grid_search(
    plant: &PlantModel,
    base: &SynthOptions,
    epsilons: &[f64],
    deltas: &[f64],
    solver: &(dyn ConeSolver + Sync),
) -> AppResult<sdp::SearchResult> {
    use rayon::prelude::*;
    let cells = sdp::grid_points(epsilons, deltas)?;
    let table = cells
        .par_iter()
        .map(|&(epsilon, delta)| {
            let mut opts = base.clone();
            opts.fixed.epsilon = epsilon;
            opts.fixed.delta = delta;
            let s = solve_instance(plant, &opts, solver)?;
            Ok(sdp::GridPoint { epsilon, delta, status: s.solution.status, mu: s.solution.mu })
        })
        .collect::<AppResult<Vec<_>>>()?;
    Ok(sdp::select_best(table)?)
}

/// Metrics of one simulated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SimMetrics {
    pub scenario: String,
    pub tau_factor: f64,
    pub rmse_fa: Vec<f64>,
    pub rmse_fs: Vec<f64>,
    /// `(component, event time, settling)` after each actuator-fault edge.
    pub settling_fa: Vec<(usize, f64, Settling)>,
    pub settling_fs: Vec<(usize, f64, Settling)>,
    pub hinf: HInfCertificate,
}

fn settling_text(s: Settling) -> String {
    match s {
        Settling::Settled(t) => format!("{t:e}"),
        Settling::NotSettled => "not-settled".into(),
    }
}

impl SimMetrics {
    /// Settling of `fa_err1` after the first actuator-fault edge.
    pub fn onset_settling(&self) -> Option<Settling> {
        self.settling_fa.iter().find(|(i, _, _)| *i == 0).map(|(_, _, s)| *s)
    }

    pub fn rows(&self) -> Vec<(String, String)> {
        let mut out = vec![("scenario".into(), self.scenario.clone()), ("tau_factor".into(), self.tau_factor.to_string())];
        for (i, v) in self.rmse_fa.iter().enumerate() {
            out.push((format!("rmse_fa_err{}", i + 1), format!("{v:e}")));
        }
        for (i, v) in self.rmse_fs.iter().enumerate() {
            out.push((format!("rmse_fs_err{}", i + 1), format!("{v:e}")));
        }
        if let Some(s) = self.onset_settling() {
            out.push(("settling_fa_err1_onset".into(), settling_text(s)));
        }
        for (i, t, s) in &self.settling_fa {
            out.push((format!("settling_fa_err{}@{t}", i + 1), settling_text(*s)));
        }
        for (i, t, s) in &self.settling_fs {
            out.push((format!("settling_fs_err{}@{t}", i + 1), settling_text(*s)));
        }
        let h = &self.hinf;
        out.push(("hinf_nu".into(), format!("{:e}", h.nu)));
        out.push(("hinf_mu".into(), format!("{:e}", h.mu)));
        out.push(("hinf_lhs".into(), format!("{:e}", h.lhs)));
        out.push(("hinf_rhs".into(), format!("{:e}", h.rhs)));
        out.push(("hinf_bound_holds".into(), h.bound_holds().to_string()));
        out.push(("hinf_w_max".into(), format!("{:e}", h.w_max)));
        out.push(("hinf_energy".into(), format!("{:e}", h.energy)));
        out
    }
}

/// Integrates a scenario with a stored gain set.
pub fn simulate(
    plant: &PlantModel,
    g: &dyn Nonlinearity,
    set: &GainSet,
    scenario: &ScenarioConfig,
) -> AppResult<(Trajectory, SimMetrics)> {
    let tr = integrate(plant, &set.gains, g, scenario)?;
    let metrics = evaluate(&tr, scenario, set)?;
    Ok((tr, metrics))
}

pub fn evaluate(tr: &Trajectory, scenario: &ScenarioConfig, set: &GainSet) -> AppResult<SimMetrics> {
    let rmse_fa = (0..tr.a1).map(|i| rmse_full(tr, Selector::FaError(i))).collect::<Result<Vec<_>, _>>()?;
    let rmse_fs = (0..tr.a2).map(|i| rmse_full(tr, Selector::FsError(i))).collect::<Result<Vec<_>, _>>()?;
    let edges = |s: &fauio_core::sim::VectorScript| -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (i, c) in s.components.iter().enumerate() {
            for t in c.breakpoints() {
                if t >= 0.0 && t < tr.horizon() {
                    out.push((i, t));
                }
            }
        }
        out
    };
    let mut settling_fa = Vec::new();
    for (i, t) in edges(&scenario.fault_a) {
        settling_fa.push((i, t, settling_time(tr, Selector::FaError(i), t, SETTLING_BAND)?));
    }
    let mut settling_fs = Vec::new();
    for (i, t) in edges(&scenario.fault_s) {
        settling_fs.push((i, t, settling_time(tr, Selector::FsError(i), t, SETTLING_BAND)?));
    }
    let p = linalg::block_diag(&[&set.p1, &(&set.p2 / set.gains.beta)]);
    Ok(SimMetrics {
        scenario: scenario.name.clone(),
        tau_factor: tr.tau_factor,
        rmse_fa,
        rmse_fs,
        settling_fa,
        settling_fs,
        hinf: hinf_check(tr, &p, set.mu),
    })
}
