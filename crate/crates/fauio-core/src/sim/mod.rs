//! Closed-loop simulation of plant and observer, scenarios and metrics.

pub mod integrate;
pub mod metrics;
pub mod nonlinear;
pub mod scenario;
pub mod signals;

pub use integrate::{integrate, Trajectory};
pub use metrics::{hinf_check, rmse, rmse_full, settling_time, HInfCertificate, Selector, Settling};
pub use nonlinear::nonlinearity;
pub use scenario::{preset, scenario_presets, FilterTau, ScenarioConfig, PRESETS};
pub use signals::{Expr, Piece, Script, VectorScript};
