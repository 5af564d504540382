//! Fast adaptive unknown input observer synthesis for Lipschitz plants with
//! simultaneous actuator and sensor faults.
//!
//! The crate is `no_std` with `alloc`. It covers the plant and descriptor
//! model, the Lipschitz vertex machinery, LMI assembly and cone lowering,
//! certificate checks, gain recovery and closed-loop simulation. Solving the
//! cone program is delegated to an implementation of [`sdp::ConeSolver`].
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod linalg;
pub mod lmi;
pub mod model;
pub mod polytope;
pub mod robot;
pub mod sdp;
pub mod sim;
pub mod synth;

pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector};
