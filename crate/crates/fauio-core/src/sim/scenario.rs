//! Scenario description and the built-in robot-arm presets.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;

use super::signals::{Expr, Script, VectorScript};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub horizon: f64,
    pub dt: f64,
    pub x0: DVector<f64>,
    /// Initial observer state; `None` starts from `zeta_hat(0) = 0`.
    pub eta0: Option<DVector<f64>>,
    pub fa_hat0: DVector<f64>,
    pub fault_a: VectorScript,
    pub fault_s: VectorScript,
    pub disturbance: VectorScript,
    pub input: VectorScript,
    /// Dirty-derivative time constant.
    pub filter: FilterTau,
}

/// Time constant of the filter realizing `y_tilde'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterTau {
    /// `tau = factor * dt`.
    Factor(f64),
    /// A fixed `tau` independent of `dt`.
    Seconds(f64),
    /// The smallest entry of [`super::integrate::AUTO_TAU_LADDER`] for which the
    /// linearized error loop is stable and inside the RK4 stability region.
    Auto,
}

impl Default for FilterTau {
    fn default() -> Self {
        FilterTau::Factor(10.0)
    }
}

impl ScenarioConfig {
    pub fn steps(&self) -> usize {
        libm::round(self.horizon / self.dt) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidValue { field: "dt".into(), reason: "must be > 0".into() });
        }
        if !(self.horizon >= self.dt) {
            return Err(Error::InvalidValue { field: "horizon".into(), reason: "must be >= dt".into() });
        }
        if let FilterTau::Factor(f) | FilterTau::Seconds(f) = self.filter {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::InvalidValue { field: "tau_factor".into(), reason: "must be > 0".into() });
            }
        }
        for (name, vs) in [("fault_a", &self.fault_a), ("fault_s", &self.fault_s), ("disturbance", &self.disturbance), ("input", &self.input)] {
            for s in &vs.components {
                for p in &s.pieces {
                    let inside = |t: f64| !t.is_finite() || (t >= 0.0 && t <= self.horizon);
                    if !inside(p.start) || !inside(p.end) || p.start > p.end {
                        return Err(Error::InvalidValue {
                            field: name.into(),
                            reason: alloc::format!("window [{}, {}) outside [0, {}]", p.start, p.end, self.horizon),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Every window edge of the fault scripts, sorted.
    pub fn fault_events(&self) -> Vec<f64> {
        let mut out = self.fault_a.breakpoints();
        out.extend(self.fault_s.breakpoints());
        out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        out.dedup();
        out
    }
}

/// Preset names for [`preset`].
pub const PRESETS: &[&str] = &["robot-5.1", "robot-case1", "robot-case2", "robot-case3"];

fn robot_base(name: &str) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        horizon: 50.0,
        dt: 1e-4,
        x0: DVector::zeros(4),
        eta0: None,
        fa_hat0: DVector::zeros(1),
        fault_a: VectorScript::zeros(1),
        fault_s: VectorScript::zeros(1),
        disturbance: VectorScript::zeros(2),
        input: VectorScript::zeros(1),
        filter: FilterTau::Auto,
    }
}

fn robot_noise() -> VectorScript {
    VectorScript::new(vec![
        Script::window(0.0, 50.0, Expr::Sin { amp: 0.2, freq: 10.0, phase: 0.0 }),
        Script::window(0.0, 50.0, Expr::Sin { amp: 0.1, freq: 10.0, phase: 0.0 }),
    ])
}

fn one(s: Script) -> VectorScript {
    VectorScript::new(vec![s])
}

/// The robot-arm scenarios. Inputs are zero and the plant starts at rest.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let mut s = robot_base(name);
    match name {
        "robot-5.1" => {
            s.fault_a = one(Script::window(
                15.0,
                30.0,
                Expr::Sum(vec![
                    Expr::Sin { amp: 3.0, freq: 0.5, phase: 0.0 },
                    Expr::Cos { amp: 2.0, freq: 5.0, phase: 0.0 },
                ]),
            ));
            s.fault_s = one(Script::window(5.0, 35.0, Expr::Ramp { slope: -0.5, t0: 20.0, offset: 5.0 }));
        }
        "robot-case1" => {
            s.fault_a = one(Script::window(20.0, 20.1, Expr::Ramp { slope: 0.1, t0: 10.0, offset: 0.0 }));
            s.fault_s = one(Script::window(30.0, 30.1, Expr::Ramp { slope: 0.1, t0: 10.0, offset: 0.0 }));
            s.disturbance = robot_noise();
        }
        "robot-case2" => {
            s.fault_a = one(Script::window(10.0, 20.0, Expr::Const(2.0)));
            s.fault_s = one(Script::window(30.0, 35.0, Expr::Const(2.0)));
            s.disturbance = robot_noise();
        }
        "robot-case3" => {
            let wave = Expr::Sum(vec![
                Expr::Sin { amp: 1.0, freq: 0.5, phase: 0.0 },
                Expr::Cos { amp: 0.2, freq: 5.0, phase: 0.0 },
            ]);
            s.fault_a = one(Script::window(15.0, 40.0, wave.clone()));
            s.fault_s = one(Script::window(15.0, 35.0, wave));
            s.disturbance = robot_noise();
        }
        other => return Err(Error::UnknownName(other.to_string())),
    }
    Ok(s)
}

/// All presets in catalog order.
pub fn scenario_presets() -> Vec<ScenarioConfig> {
    PRESETS.iter().map(|n| preset(n).expect("preset names are valid")).collect()
}
