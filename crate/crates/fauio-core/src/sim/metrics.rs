//! Error metrics and the trajectory-level H-infinity check.

use nalgebra::DMatrix;

use super::integrate::Trajectory;
use crate::error::{Error, Result};
use crate::linalg;

/// Default settling band, relative to the post-event peak.
pub const SETTLING_BAND: f64 = 0.02;

/// Scalar series drawn from a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    /// `fa_i - fa_hat_i`.
    FaError(usize),
    /// `fs_i - fs_hat_i`.
    FsError(usize),
    /// Component `i` of the full error `e`.
    Error(usize),
}

impl Selector {
    pub fn value(&self, tr: &Trajectory, k: usize) -> f64 {
        match *self {
            Selector::FaError(i) => tr.fa_error(k, i),
            Selector::FsError(i) => tr.fs_error(k, i),
            Selector::Error(i) => tr.error(k)[i],
        }
    }
}

/// Grid indices with `t0 <= t_k < t1`, tolerant to grid rounding.
pub fn window_indices(tr: &Trajectory, t0: f64, t1: f64) -> core::ops::Range<usize> {
    let half = 0.5 * tr.dt;
    let lo = tr.time.partition_point(|&t| t < t0 - half);
    let hi = tr.time.partition_point(|&t| t < t1 - half);
    lo..hi.max(lo)
}

/// Root mean square of the selected error over `[t0, t1)`.
pub fn rmse(tr: &Trajectory, sel: Selector, t0: f64, t1: f64) -> Result<f64> {
    let idx = window_indices(tr, t0, t1);
    if idx.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let count = idx.len() as f64;
    let sum: f64 = idx.map(|k| {
        let v = sel.value(tr, k);
        v * v
    })
    .sum();
    Ok(libm::sqrt(sum / count))
}

/// RMSE over the whole grid.
pub fn rmse_full(tr: &Trajectory, sel: Selector) -> Result<f64> {
    rmse(tr, sel, 0.0, tr.horizon() + tr.dt)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Settling {
    /// Seconds after the event.
    Settled(f64),
    NotSettled,
}

impl Settling {
    pub fn seconds(&self) -> Option<f64> {
        match self {
            Settling::Settled(s) => Some(*s),
            Settling::NotSettled => None,
        }
    }
}

/// First time after `event` from which `|error|` stays within `band` times
/// its post-event peak until the next scripted event (or the horizon).
pub fn settling_time(tr: &Trajectory, sel: Selector, event: f64, band: f64) -> Result<Settling> {
    let next = tr.events.iter().copied().find(|&t| t > event + 0.5 * tr.dt).unwrap_or(f64::INFINITY);
    let idx = window_indices(tr, event, next);
    if idx.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let start = idx.start;
    let values: alloc::vec::Vec<f64> = idx.clone().map(|k| libm::fabs(sel.value(tr, k))).collect();
    let peak = values.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(Settling::Settled(0.0));
    }
    let threshold = band * peak;
    match values.iter().rposition(|&v| v > threshold) {
        None => Ok(Settling::Settled(0.0)),
        Some(last) if last + 1 == values.len() => Ok(Settling::NotSettled),
        Some(last) => Ok(Settling::Settled(tr.time[start + last + 1] - tr.time[start])),
    }
}

/// Trajectory evaluation of `||e|| <= sqrt(nu ||e0||^2 + mu ||w_bar||^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HInfCertificate {
    /// `lambda_max(P)`.
    pub nu: f64,
    pub mu: f64,
    /// `||e||_L2` over the horizon.
    pub lhs: f64,
    pub rhs: f64,
    /// Maximum over the grid of `V(e_k) - V(e_0) + int ||e||^2 - mu int ||w_bar||^2`.
    pub w_max: f64,
    /// `V(e_0) + int ||e||^2 + mu int ||w_bar||^2`, the scale for `w_max`.
    pub energy: f64,
}

impl HInfCertificate {
    pub fn bound_holds(&self) -> bool {
        self.lhs <= self.rhs
    }
    /// `w_max <= rel * energy`.
    pub fn dissipation_holds(&self, rel: f64) -> bool {
        self.w_max <= rel * self.energy
    }
}

/// Evaluates the attenuation bound and the running dissipation integral with
/// `V(e) = e^T P e`. Integrals use the left rectangle rule on the grid.
pub fn hinf_check(tr: &Trajectory, p: &DMatrix<f64>, mu: f64) -> HInfCertificate {
    let nu = linalg::lambda_max(p);
    let v = |e: &nalgebra::DVector<f64>| (e.transpose() * p * e)[(0, 0)];
    let e0 = tr.error(0);
    let v0 = v(&e0);
    let (mut int_e, mut int_w) = (0.0, 0.0);
    let mut w_max = 0.0f64;
    for k in 0..tr.len() {
        let e = tr.error(k);
        let w = v(&e) - v0 + int_e - mu * int_w;
        w_max = w_max.max(w);
        if k + 1 < tr.len() {
            int_e += e.norm_squared() * tr.dt;
            int_w += tr.omega_bar(k).iter().map(|x| x * x).sum::<f64>() * tr.dt;
        }
    }
    HInfCertificate {
        nu,
        mu,
        lhs: libm::sqrt(int_e),
        rhs: libm::sqrt(nu * e0.norm_squared() + mu * int_w),
        w_max,
        energy: v0 + int_e + mu * int_w,
    }
}
