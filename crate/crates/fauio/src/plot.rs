//! SVG line charts of fault estimates and estimation errors.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use fauio_core::sim::Trajectory;

use crate::error::{AppError, AppResult};

/// Per-series point budget; long runs are reduced to per-bucket min and max
/// so spikes survive.
pub const MAX_POINTS: usize = 4000;

pub fn decimate(t: &[f64], v: &[f64], budget: usize) -> Vec<(f64, f64)> {
    if t.len() <= budget || budget < 4 {
        return t.iter().copied().zip(v.iter().copied()).collect();
    }
    let buckets = budget / 2;
    let size = t.len().div_ceil(buckets);
    let mut out = Vec::with_capacity(budget + 2);
    for start in (0..t.len()).step_by(size) {
        let end = (start + size).min(t.len());
        let (mut lo, mut hi) = (start, start);
        for k in start..end {
            if v[k] < v[lo] {
                lo = k;
            }
            if v[k] > v[hi] {
                hi = k;
            }
        }
        let (a, b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        out.push((t[a], v[a]));
        if b != a {
            out.push((t[b], v[b]));
        }
    }
    out
}

struct Series<'a> {
    label: &'a str,
    values: Vec<f64>,
    color: RGBColor,
}

fn chart(path: &Path, title: &str, tr: &Trajectory, series: &[Series], hash: &str) -> AppResult<()> {
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (900, 420)).into_drawing_area();
        let err = |e: &dyn std::fmt::Display| AppError::parse(path, format!("plot: {e}"));
        root.fill(&WHITE).map_err(|e| err(&e))?;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in series {
            for &v in &s.values {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() || !hi.is_finite() {
            lo = -1.0;
            hi = 1.0;
        }
        let pad = ((hi - lo) * 0.05).max(1e-12);
        let mut c = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 20))
            .margin(10)
            .x_label_area_size(35)
            .y_label_area_size(70)
            .build_cartesian_2d(0.0..tr.horizon().max(tr.dt), (lo - pad)..(hi + pad))
            .map_err(|e| err(&e))?;
        c.configure_mesh().x_desc("t [s]").draw().map_err(|e| err(&e))?;
        for s in series {
            let color = s.color;
            c.draw_series(LineSeries::new(decimate(&tr.time, &s.values, MAX_POINTS), color))
                .map_err(|e| err(&e))?
                .label(s.label)
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
        }
        c.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw().map_err(|e| err(&e))?;
        root.present().map_err(|e| err(&e))?;
    }
    let tagged = match svg.find('>') {
        Some(i) => format!("{}<!-- manifest {hash} -->{}", &svg[..=i], &svg[i + 1..]),
        None => svg,
    };
    std::fs::write(path, tagged).map_err(|e| AppError::io(path, e))
}

/// Writes `fa.svg`, `fs.svg`, `fa_err.svg` and `fs_err.svg` (first component of each).
pub fn write_plots(dir: &Path, tr: &Trajectory, hash: &str) -> AppResult<Vec<PathBuf>> {
    let k = 0..tr.len();
    let fa: Vec<f64> = k.clone().map(|k| tr.fa(k)[0]).collect();
    let fa_hat: Vec<f64> = k.clone().map(|k| tr.fa_hat(k)[0]).collect();
    let fs: Vec<f64> = k.clone().map(|k| tr.fs(k)[0]).collect();
    let fs_hat: Vec<f64> = k.clone().map(|k| tr.fs_hat(k)[0]).collect();
    let fa_err: Vec<f64> = k.clone().map(|k| tr.fa_error(k, 0)).collect();
    let fs_err: Vec<f64> = k.map(|k| tr.fs_error(k, 0)).collect();
    let blue = RGBColor(31, 119, 180);
    let red = RGBColor(214, 39, 40);
    let jobs = [
        ("fa.svg", "Actuator fault and estimate", vec![Series { label: "fa", values: fa, color: blue }, Series { label: "fa_hat", values: fa_hat, color: red }]),
        ("fs.svg", "Sensor fault and estimate", vec![Series { label: "fs", values: fs, color: blue }, Series { label: "fs_hat", values: fs_hat, color: red }]),
        ("fa_err.svg", "Actuator fault estimation error", vec![Series { label: "fa - fa_hat", values: fa_err, color: blue }]),
        ("fs_err.svg", "Sensor fault estimation error", vec![Series { label: "fs - fs_hat", values: fs_err, color: blue }]),
    ];
    let mut out = Vec::new();
    for (name, title, series) in jobs {
        let path = dir.join(name);
        chart(&path, title, tr, &series, hash)?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimation_keeps_extremes() {
        let t: Vec<f64> = (0..100_000).map(|k| k as f64).collect();
        let mut v = vec![0.0; t.len()];
        v[12_345] = 9.0;
        v[77_777] = -4.0;
        let d = decimate(&t, &v, 1000);
        assert!(d.len() <= 1002);
        assert!(d.contains(&(12_345.0, 9.0)));
        assert!(d.contains(&(77_777.0, -4.0)));
    }
}
