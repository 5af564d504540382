//! Matrix text format and the gains directory.
//!
//! A matrix file is optional `#` comment lines, a `rows cols` header, then
//! `rows` lines of whitespace-separated values written with 17 significant
//! digits.

use std::fmt::Write as _;
use std::path::Path;

use fauio_core::lmi::Assignment;
use fauio_core::synth::ObserverGains;
use fauio_core::DMatrix;

use crate::error::{AppError, AppResult};

pub fn format_matrix(m: &DMatrix<f64>, comment: Option<&str>) -> String {
    let mut s = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(s, "# {line}");
        }
    }
    let _ = writeln!(s, "{} {}", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:.16e}", m[(r, c)])).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

pub fn parse_matrix(text: &str, path: &Path) -> AppResult<DMatrix<f64>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (hl, header) = lines.next().ok_or_else(|| AppError::parse(path, "missing `rows cols` header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| AppError::parse(path, format!("line {}: bad header: {e}", hl + 1)))?;
    if dims.len() != 2 {
        return Err(AppError::parse(path, format!("line {}: header must be `rows cols`", hl + 1)));
    }
    let (rows, cols) = (dims[0], dims[1]);
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (ln, line) in lines {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| AppError::parse(path, format!("line {}: {e}", ln + 1)))?;
        if vals.len() != cols {
            return Err(AppError::parse(path, format!("line {}: expected {cols} values, found {}", ln + 1, vals.len())));
        }
        data.extend(vals);
        seen += 1;
    }
    if seen != rows && cols != 0 {
        return Err(AppError::parse(path, format!("expected {rows} rows, found {seen}")));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>, comment: Option<&str>) -> AppResult<()> {
    std::fs::write(path, format_matrix(m, comment)).map_err(|e| AppError::io(path, e))
}

pub fn read_matrix(path: &Path) -> AppResult<DMatrix<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_matrix(&text, path)
}

/// Gains plus the Lyapunov data needed by the trajectory H-infinity check.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSet {
    pub gains: ObserverGains,
    pub p1: DMatrix<f64>,
    pub p2: DMatrix<f64>,
    pub mu: f64,
}

impl GainSet {
    pub fn new(gains: ObserverGains, a: &Assignment) -> Self {
        Self { gains, p1: a.p1.clone(), p2: a.p2.clone(), mu: a.mu }
    }
}

pub const GAIN_FILES: &[&str] = &["N", "J", "L1", "F", "K", "L2", "beta", "P1", "P2", "mu"];

fn scalar(v: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, v)
}

/// Writes one `<name>.mat` file per matrix into `dir`.
pub fn write_gains(dir: &Path, set: &GainSet, comment: Option<&str>) -> AppResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let g = &set.gains;
    let items: [(&str, DMatrix<f64>); 10] = [
        ("N", g.n.clone()),
        ("J", g.j.clone()),
        ("L1", g.l1.clone()),
        ("F", g.f.clone()),
        ("K", g.k.clone()),
        ("L2", g.l2.clone()),
        ("beta", scalar(g.beta)),
        ("P1", set.p1.clone()),
        ("P2", set.p2.clone()),
        ("mu", scalar(set.mu)),
    ];
    for (name, m) in items {
        write_matrix(&dir.join(format!("{name}.mat")), &m, comment)?;
    }
    Ok(())
}

pub fn read_gains(dir: &Path) -> AppResult<GainSet> {
    let missing: Vec<String> =
        GAIN_FILES.iter().filter(|n| !dir.join(format!("{n}.mat")).is_file()).map(|n| format!("{n}.mat")).collect();
    if !missing.is_empty() {
        return Err(AppError::MissingArtifacts(missing));
    }
    let r = |n: &str| read_matrix(&dir.join(format!("{n}.mat")));
    let one = |n: &str| -> AppResult<f64> {
        let m = r(n)?;
        if m.shape() != (1, 1) {
            return Err(AppError::parse(dir.join(format!("{n}.mat")), "expected a 1 x 1 matrix"));
        }
        Ok(m[(0, 0)])
    };
    Ok(GainSet {
        gains: ObserverGains { n: r("N")?, j: r("J")?, l1: r("L1")?, f: r("F")?, k: r("K")?, l2: r("L2")?, beta: one("beta")? },
        p1: r("P1")?,
        p2: r("P2")?,
        mu: one("mu")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0 / 3.0, -2.5e-17, 1e300, std::f64::consts::PI, 0.0, -7.0]);
        let text = format_matrix(&m, Some("manifest abc"));
        assert!(text.starts_with("# manifest abc\n2 3\n"));
        assert_eq!(parse_matrix(&text, Path::new("m")).unwrap(), m);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = parse_matrix("2 2\n1 2\n3\n", Path::new("m")).unwrap_err();
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn empty_matrix() {
        let m = DMatrix::<f64>::zeros(3, 0);
        assert_eq!(parse_matrix(&format_matrix(&m, None), Path::new("m")).unwrap().shape(), (3, 0));
    }
}
