//! The single-link flexible-joint robot arm used as the reference example.

use alloc::vec;

use nalgebra::DMatrix;

use crate::lmi::FixedScalars;
use crate::model::PlantModel;

fn mat(rows: usize, cols: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, data)
}

/// Plant with both disturbance channels (`E1 = [0;0;0;1]`, `D1 = [0.1;-0.02;0]`).
pub fn plant() -> PlantModel {
    let a = mat(4, 4, &[0.0, 1.0, 0.0, 0.0, -48.6, -1.25, 48.6, 0.0, 0.0, 0.0, 0.0, 1.0, 19.5, 0.0, -19.5, 0.0]);
    let b = mat(4, 1, &[0.0, 21.6, 0.0, 0.0]);
    let c = mat(3, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
    let g = mat(4, 1, &[0.0, 0.0, 0.0, -3.33]);
    let d_f = mat(3, 1, &[1.0, 0.0, 0.0]);
    let h1 = mat(4, 4, &[0.0, 0.0, 1.0, 0.0, -1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, -1.0, 0.0, -1.0, 0.0, 0.0]);
    let e1 = mat(4, 1, &[0.0, 0.0, 0.0, 1.0]);
    let d1 = mat(3, 1, &[0.1, -0.02, 0.0]);
    PlantModel::new(a, b.clone(), c, g, b, d_f, Some(e1), Some(d1), vec![h1], lipschitz_bounds())
        .expect("robot data is consistent")
}

/// Bounds on `dg/dnu` for `g(nu) = sin(nu_1)`: only the first argument enters.
pub fn lipschitz_bounds() -> DMatrix<f64> {
    mat(1, 4, &[1.0, 0.0, 0.0, 0.0])
}

pub fn theorem1_scalars() -> FixedScalars {
    FixedScalars { epsilon: 0.1, delta: None, beta: 100.0 }
}

pub fn theorem2_scalars() -> FixedScalars {
    FixedScalars { epsilon: 0.0112, delta: Some(5.0), beta: 100.0 }
}
