//! Command implementations behind the `fauio` binary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fauio_core::lmi::{FixedScalars, Theorem};
use fauio_core::model::ConditionReport;
use fauio_core::sim::{ScenarioConfig, PRESETS};

use crate::config::{Config, ScenarioFile};
use crate::error::{AppError, AppResult};
use crate::manifest::RunManifest;
use crate::matio::{read_gains, write_gains, GainSet};
use crate::output;
use crate::pipeline::{self, SynthOptions};
use crate::{plot, ClarabelSolver};

pub const VALIDATION_FILE: &str = "validation.csv";
pub const SYNTHESIS_FILE: &str = "synthesis.csv";
pub const CERTIFICATE_FILE: &str = "certificate.csv";
pub const DESIGN_FILE: &str = "design.csv";
pub const GRID_FILE: &str = "grid.csv";
pub const GAINS_DIR: &str = "gains";
pub const SIM_DIR: &str = "sim";

fn mkdir(dir: &Path) -> AppResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

fn write_checks(path: &Path, report: &ConditionReport, hash: &str) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| AppError::parse(path, e.to_string());
    w.write_record(["check", "passed", "detail"]).map_err(err)?;
    for c in &report.checks {
        w.write_record([c.name.as_str(), if c.passed { "true" } else { "false" }, c.detail.as_str()]).map_err(err)?;
    }
    let body = w.into_inner().map_err(|e| AppError::parse(path, e.to_string()))?;
    let mut out = format!("# manifest {hash}\n").into_bytes();
    out.extend(body);
    std::fs::write(path, out).map_err(|e| AppError::io(path, e))
}

fn write_pairs(path: &Path, rows: &[(String, String)], hash: &str) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| AppError::parse(path, e.to_string());
    w.write_record(["key", "value"]).map_err(err)?;
    for (k, v) in rows {
        w.write_record([k, v]).map_err(err)?;
    }
    let body = w.into_inner().map_err(|e| AppError::parse(path, e.to_string()))?;
    let mut out = format!("# manifest {hash}\n").into_bytes();
    out.extend(body);
    std::fs::write(path, out).map_err(|e| AppError::io(path, e))
}

/// Assumption and rank checks. Fails with exit code 1 if any check fails.
pub fn cmd_validate(config: &Path, out: &Path) -> AppResult<ConditionReport> {
    let (cfg, text) = Config::load(config)?;
    let plant = cfg.plant()?;
    cfg.nonlinearity()?;
    let report = pipeline::validate(&plant)?;
    mkdir(out)?;
    let mut m = RunManifest::new("validate", config, &text);
    write_checks(&out.join(VALIDATION_FILE), &report, &m.hash())?;
    m.write(&out.join("validate.manifest.toml"))?;
    let failed: Vec<String> = report.failed().map(|c| c.name.clone()).collect();
    if !failed.is_empty() {
        return Err(AppError::CheckFailed(failed.join(", ")));
    }
    Ok(report)
}

#[derive(Debug, Clone, Default)]
pub struct SynthArgs {
    pub theorem: Option<u8>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub beta: Option<f64>,
    pub grid: bool,
    pub grid_epsilon: Vec<f64>,
    pub grid_delta: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SynthSummary {
    pub theorem: Theorem,
    pub fixed: FixedScalars,
    pub sqrt_mu: f64,
    pub certified: bool,
    pub grid: Option<fauio_core::sdp::SearchResult>,
}

fn resolve_synth(cfg: &Config, args: &SynthArgs) -> AppResult<SynthOptions> {
    let s = &cfg.synthesis;
    let theorem = match args.theorem.or(s.theorem).unwrap_or(1) {
        1 => Theorem::One,
        2 => Theorem::Two,
        t => return Err(AppError::Usage(format!("--theorem must be 1 or 2, got {t}"))),
    };
    let beta = args.beta.or(s.beta).ok_or_else(|| AppError::Usage("--beta is required".into()))?;
    let epsilon = args.epsilon.or(s.epsilon);
    let delta = args.delta.or(s.delta);
    if theorem == Theorem::Two && delta.is_none() && !args.grid {
        return Err(AppError::Usage("--theorem 2 requires --delta".into()));
    }
    let epsilon = match epsilon {
        Some(e) => e,
        None if args.grid => 1.0,
        None => return Err(AppError::Usage("--epsilon is required".into())),
    };
    let delta = if theorem == Theorem::Two { Some(delta.unwrap_or(1.0)) } else { None };
    for (name, v) in [("epsilon", Some(epsilon)), ("delta", delta), ("beta", Some(beta))] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                return Err(AppError::Usage(format!("--{name} must be positive, got {v}")));
            }
        }
    }
    let mut opts = SynthOptions::new(theorem, FixedScalars { epsilon, delta, beta })?;
    opts.settings = cfg.solver.settings();
    Ok(opts)
}

/// Solves the LMI, writes gains, certificate and design checks.
pub fn cmd_synth(config: &Path, args: &SynthArgs, out: &Path) -> AppResult<SynthSummary> {
    let (cfg, text) = Config::load(config)?;
    let plant = cfg.plant()?;
    let mut opts = resolve_synth(&cfg, args)?;
    let validation = pipeline::validate(&plant)?;
    if !validation.all_passed() {
        let failed: Vec<String> = validation.failed().map(|c| c.name.clone()).collect();
        return Err(AppError::CheckFailed(failed.join(", ")));
    }
    mkdir(out)?;
    let solver = ClarabelSolver::default();
    let mut m = RunManifest::new("synth", config, &text);

    let grid = if args.grid {
        let eps = if args.grid_epsilon.is_empty() { cfg.synthesis.grid_epsilon.clone() } else { args.grid_epsilon.clone() };
        let del = if args.grid_delta.is_empty() { cfg.synthesis.grid_delta.clone() } else { args.grid_delta.clone() };
        let eps = if eps.is_empty() { vec![0.01, 0.1, 1.0] } else { eps };
        let del = match (opts.theorem, del.is_empty()) {
            (Theorem::One, _) => Vec::new(),
            (Theorem::Two, true) => vec![1.0, 5.0, 10.0],
            (Theorem::Two, false) => del,
        };
        m.param("grid_epsilon", format!("{eps:?}")).param("grid_delta", format!("{del:?}"));
        let res = pipeline::grid_search(&plant, &opts, &eps, &del, &solver)?;
        output::write_grid(&out.join(GRID_FILE), &res.table, res.best, &m.hash())?;
        let best = res.best_point();
        opts.fixed.epsilon = best.epsilon;
        opts.fixed.delta = best.delta;
        Some(res)
    } else {
        None
    };

    m.param("theorem", if opts.theorem == Theorem::One { 1 } else { 2 })
        .param("epsilon", opts.fixed.epsilon)
        .param("beta", opts.fixed.beta);
    if let Some(d) = opts.fixed.delta {
        m.param("delta", d);
    }
    let hash = m.hash();
    let s = pipeline::synthesize(&plant, &opts, &solver)?;
    let set = GainSet::new(s.gains.clone(), &s.solution.assignment);
    write_gains(&out.join(GAINS_DIR), &set, Some(&format!("manifest {hash}")))?;
    output::write_certificate(&out.join(CERTIFICATE_FILE), &s.certificate, &hash)?;
    let mut checks = s.certificate.report.clone();
    checks.extend(s.design.report.clone());
    write_checks(&out.join(DESIGN_FILE), &checks, &hash)?;
    let shape = |m: &fauio_core::DMatrix<f64>| format!("{}x{}", m.nrows(), m.ncols());
    let rows: Vec<(String, String)> = vec![
        ("theorem".into(), if opts.theorem == Theorem::One { "1".into() } else { "2".into() }),
        ("epsilon".into(), opts.fixed.epsilon.to_string()),
        ("delta".into(), opts.fixed.delta.map(|d| d.to_string()).unwrap_or_default()),
        ("beta".into(), opts.fixed.beta.to_string()),
        ("status".into(), s.solution.status.to_string()),
        ("mu".into(), format!("{:e}", s.solution.mu)),
        ("sqrt_mu".into(), format!("{:e}", s.solution.sqrt_mu)),
        ("iterations".into(), s.solution.iterations.to_string()),
        ("vertices".into(), s.problem.vertices.len().to_string()),
        ("lmi_size".into(), s.problem.constraint_size().to_string()),
        ("certificate_passed".into(), s.certificate.passed().to_string()),
        ("max_vertex_abscissa".into(), format!("{:e}", s.design.max_abscissa)),
        ("shape_N".into(), shape(&s.gains.n)),
        ("shape_J".into(), shape(&s.gains.j)),
        ("shape_K".into(), shape(&s.gains.k)),
        ("shape_L1".into(), shape(&s.gains.l1)),
        ("shape_F".into(), shape(&s.gains.f)),
        ("shape_L2".into(), shape(&s.gains.l2)),
    ];
    write_pairs(&out.join(SYNTHESIS_FILE), &rows, &hash)?;
    m.write(&out.join("synth.manifest.toml"))?;
    let certified = s.accepted();
    if !certified {
        return Err(AppError::CheckFailed(format!(
            "solution did not certify: {}",
            checks.failed().map(|c| c.name.clone()).collect::<Vec<_>>().join(", ")
        )));
    }
    Ok(SynthSummary { theorem: opts.theorem, fixed: opts.fixed, sqrt_mu: s.solution.sqrt_mu, certified, grid })
}

#[derive(Debug, Clone)]
pub enum ScenarioSource {
    Preset(String),
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub gains: Option<PathBuf>,
    pub scenario: ScenarioSource,
    /// CSV row stride; 1 writes every step.
    pub stride: usize,
}

/// Runs one scenario and writes `sim/<name>/{trajectory.csv, metrics.csv, *.svg}`.
pub fn cmd_simulate(config: &Path, args: &SimulateArgs, out: &Path) -> AppResult<pipeline::SimMetrics> {
    let (cfg, text) = Config::load(config)?;
    let plant = cfg.plant()?;
    let g = cfg.nonlinearity()?;
    let gains_dir = args.gains.clone().unwrap_or_else(|| out.join(GAINS_DIR));
    let set = read_gains(&gains_dir)?;
    let (scenario, scenario_text): (ScenarioConfig, String) = match &args.scenario {
        ScenarioSource::Preset(name) => {
            if !PRESETS.contains(&name.as_str()) {
                return Err(AppError::Usage(format!("unknown preset `{name}`; known: {}", PRESETS.join(", "))));
            }
            (cfg.preset(name)?, format!("preset:{name}"))
        }
        ScenarioSource::File(p) => {
            let f = ScenarioFile::load(p)?;
            let t = std::fs::read_to_string(p).map_err(|e| AppError::io(p, e))?;
            let mut s = f.to_scenario(&plant);
            if f.tau_factor.is_none() {
                cfg.simulation.apply(&mut s);
            }
            (s, t)
        }
    };
    let gains_hash = crate::manifest::sha256_hex(crate::matio::format_matrix(&set.gains.n, None).as_bytes());
    let mut m = RunManifest::new("simulate", config, &text);
    m.param("scenario", crate::manifest::sha256_hex(scenario_text.as_bytes()))
        .param("scenario_name", &scenario.name)
        .param("dt", scenario.dt)
        .param("horizon", scenario.horizon)
        .param("stride", args.stride)
        .param("gains_N", gains_hash);
    let hash = m.hash();
    let (tr, metrics) = pipeline::simulate(&plant, g.as_ref(), &set, &scenario)?;
    let dir = out.join(SIM_DIR).join(&scenario.name);
    mkdir(&dir)?;
    output::write_trajectory(&dir.join("trajectory.csv"), &tr, args.stride, &hash)?;
    output::write_metrics(&dir.join("metrics.csv"), &metrics, &hash)?;
    plot::write_plots(&dir, &tr, &hash)?;
    m.param("tau_factor", tr.tau_factor);
    m.write(&dir.join("manifest.toml"))?;
    Ok(metrics)
}

/// Parses a `key,value` CSV written by this tool.
pub fn read_pairs(path: &Path) -> AppResult<BTreeMap<String, String>> {
    Ok(output::read_metrics(path)?.into_iter().collect())
}
