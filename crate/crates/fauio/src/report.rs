//! Consolidated Markdown report over a run directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::commands::{read_pairs, GAINS_DIR, SIM_DIR, SYNTHESIS_FILE, VALIDATION_FILE};
use crate::error::{AppError, AppResult};
use crate::matio::GAIN_FILES;

pub const REPORT_FILE: &str = "report.md";

/// Simulation runs found under `sim/`, sorted by name.
fn sim_runs(dir: &Path) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir.join(SIM_DIR))
        .map(|it| it.filter_map(|e| e.ok()).map(|e| e.path()).filter(|p| p.join("metrics.csv").is_file()).collect())
        .unwrap_or_default();
    out.sort();
    out
}

fn missing(dir: &Path) -> Vec<String> {
    let mut out = Vec::new();
    for f in [VALIDATION_FILE, SYNTHESIS_FILE] {
        if !dir.join(f).is_file() {
            out.push(f.to_string());
        }
    }
    for g in GAIN_FILES {
        let rel = format!("{GAINS_DIR}/{g}.mat");
        if !dir.join(&rel).is_file() {
            out.push(rel);
        }
    }
    if sim_runs(dir).is_empty() {
        out.push(format!("{SIM_DIR}/<scenario>/metrics.csv"));
    }
    out
}

fn read_validation(path: &Path) -> AppResult<Vec<(String, String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| AppError::parse(path, e.to_string()))?;
        out.push((rec[0].to_string(), rec[1].to_string(), rec[2].to_string()));
    }
    Ok(out)
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|")
}

fn get<'a>(m: &'a std::collections::BTreeMap<String, String>, k: &str) -> &'a str {
    m.get(k).map(String::as_str).unwrap_or("-")
}

/// Builds `report.md` with validation, synthesis, gain and metric sections.
pub fn cmd_report(dir: &Path) -> AppResult<PathBuf> {
    let miss = missing(dir);
    if !miss.is_empty() {
        return Err(AppError::MissingArtifacts(miss));
    }
    let mut s = String::new();
    let _ = writeln!(s, "# FAUIO run report\n");

    let _ = writeln!(s, "## Validation\n\n| check | passed | detail |\n|---|---|---|");
    for (c, p, d) in read_validation(&dir.join(VALIDATION_FILE))? {
        let _ = writeln!(s, "| {} | {p} | {} |", cell(&c), cell(&d));
    }

    let syn = read_pairs(&dir.join(SYNTHESIS_FILE))?;
    let _ = writeln!(s, "\n## Synthesis\n\n| quantity | value |\n|---|---|");
    for k in ["theorem", "epsilon", "delta", "beta", "status", "sqrt_mu", "vertices", "lmi_size", "certificate_passed", "max_vertex_abscissa"] {
        let _ = writeln!(s, "| {k} | {} |", get(&syn, k));
    }

    let _ = writeln!(s, "\n## Gains\n\n| gain | shape |\n|---|---|");
    for k in ["N", "J", "K", "L1", "F", "L2"] {
        let _ = writeln!(s, "| {k} | {} |", get(&syn, &format!("shape_{k}")));
    }

    let _ = writeln!(
        s,
        "\n## Metrics\n\n| scenario | RMSE fa_err | RMSE fs_err | settling fa_err [s] | H-inf lhs | H-inf rhs | lhs <= rhs |\n|---|---|---|---|---|---|---|"
    );
    let runs = sim_runs(dir);
    for run in &runs {
        let m = read_pairs(&run.join("metrics.csv"))?;
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} |",
            get(&m, "scenario"),
            get(&m, "rmse_fa_err1"),
            get(&m, "rmse_fs_err1"),
            get(&m, "settling_fa_err1_onset"),
            get(&m, "hinf_lhs"),
            get(&m, "hinf_rhs"),
            get(&m, "hinf_bound_holds"),
        );
    }
    let _ = writeln!(s, "\n### Plots");
    for run in &runs {
        let name = run.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let _ = writeln!(s, "\n#### {name}\n");
        for f in ["fa.svg", "fs.svg", "fa_err.svg", "fs_err.svg"] {
            if run.join(f).is_file() {
                let _ = writeln!(s, "![{name} {f}]({SIM_DIR}/{name}/{f})");
            }
        }
    }
    let path = dir.join(REPORT_FILE);
    std::fs::write(&path, s).map_err(|e| AppError::io(&path, e))?;
    Ok(path)
}
