//! File formats, the `clarabel` backend and the command pipeline around
//! [`fauio_core`].

extern crate openblas_src;

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod matio;
pub mod output;
pub mod pipeline;
pub mod plot;
pub mod report;
pub mod solver;

pub use error::{AppError, AppResult};
pub use solver::ClarabelSolver;
