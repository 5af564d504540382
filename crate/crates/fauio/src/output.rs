//! CSV artifacts. Every file starts with a `# manifest <hash>` line.

use std::path::Path;

use fauio_core::sdp::CertificateReport;
use fauio_core::sim::Trajectory;

use crate::error::{AppError, AppResult};
use crate::pipeline::SimMetrics;

/// Column order of the trajectory CSV, for `--help` and the docs.
pub const TRAJECTORY_COLUMNS: &str = "t, x1..xn, zeta_hat1..zeta_hat(n+a2), fa1..fa(a1), fa_hat1.., fs1..fs(a2), \
fs_hat1.., fa_err1.., fs_err1.., y_tilde1..y_tilde(p), e1..e(n+a2+a1), wbar1..wbar(2q+a1)";

fn csv_error(path: &Path, e: csv::Error) -> AppError {
    AppError::parse(path, e.to_string())
}

fn finish(path: &Path, hash: &str, w: csv::Writer<Vec<u8>>) -> AppResult<()> {
    let body = w.into_inner().map_err(|e| AppError::parse(path, e.to_string()))?;
    let mut out = format!("# manifest {hash}\n").into_bytes();
    out.extend(body);
    std::fs::write(path, out).map_err(|e| AppError::io(path, e))
}

pub fn trajectory_header(tr: &Trajectory) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    let mut push = |name: &str, n: usize| h.extend((1..=n).map(|i| format!("{name}{i}")));
    push("x", tr.n);
    push("zeta_hat", tr.n_new);
    push("fa", tr.a1);
    push("fa_hat", tr.a1);
    push("fs", tr.a2);
    push("fs_hat", tr.a2);
    push("fa_err", tr.a1);
    push("fs_err", tr.a2);
    push("y_tilde", tr.p);
    push("e", tr.n_new + tr.a1);
    push("wbar", tr.omega_bar_width());
    h
}

/// Writes every `stride`-th grid point (stride 1 is one row per step).
pub fn write_trajectory(path: &Path, tr: &Trajectory, stride: usize, hash: &str) -> AppResult<()> {
    let stride = stride.max(1);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(trajectory_header(tr)).map_err(|e| csv_error(path, e))?;
    let mut rec: Vec<String> = Vec::new();
    for k in (0..tr.len()).step_by(stride) {
        rec.clear();
        rec.push(tr.time[k].to_string());
        // `+ 0.0` maps -0 to 0.
        let mut put = |v: &[f64]| rec.extend(v.iter().map(|x| (x + 0.0).to_string()));
        put(tr.x(k));
        put(tr.zeta_hat(k));
        put(tr.fa(k));
        put(tr.fa_hat(k));
        put(tr.fs(k));
        put(tr.fs_hat(k));
        put(&(0..tr.a1).map(|i| tr.fa_error(k, i)).collect::<Vec<_>>());
        put(&(0..tr.a2).map(|i| tr.fs_error(k, i)).collect::<Vec<_>>());
        put(tr.y_tilde(k));
        put(tr.error(k).as_slice());
        put(tr.omega_bar(k));
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
    }
    finish(path, hash, w)
}

/// `metric,value` rows.
pub fn write_metrics(path: &Path, m: &SimMetrics, hash: &str) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["metric", "value"]).map_err(|e| csv_error(path, e))?;
    for (k, v) in m.rows() {
        w.write_record([k, v]).map_err(|e| csv_error(path, e))?;
    }
    finish(path, hash, w)
}

pub fn read_metrics(path: &Path) -> AppResult<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        out.push((rec.get(0).unwrap_or("").to_string(), rec.get(1).unwrap_or("").to_string()));
    }
    Ok(out)
}

/// One row per vertex constraint.
pub fn write_certificate(path: &Path, c: &CertificateReport, hash: &str) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["vertex", "lambda_max", "norm", "passed"]).map_err(|e| csv_error(path, e))?;
    for v in &c.vertices {
        w.write_record([v.vertex.to_string(), format!("{:e}", v.lambda_max), format!("{:e}", v.norm), v.passed.to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    finish(path, hash, w)
}

/// One row per grid cell.
pub fn write_grid(path: &Path, table: &[fauio_core::sdp::GridPoint], best: usize, hash: &str) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["epsilon", "delta", "status", "mu", "sqrt_mu", "best"]).map_err(|e| csv_error(path, e))?;
    for (i, g) in table.iter().enumerate() {
        w.write_record([
            g.epsilon.to_string(),
            g.delta.map(|d| d.to_string()).unwrap_or_default(),
            g.status.to_string(),
            format!("{:e}", g.mu),
            format!("{:e}", g.mu.max(0.0).sqrt()),
            (i == best).to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    finish(path, hash, w)
}
