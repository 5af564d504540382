#![allow(dead_code)]

use fauio_core::model::{augment_descriptor, DescriptorModel, PlantModel};
use fauio_core::sim::{FilterTau, ScenarioConfig, VectorScript};
use fauio_core::synth::{compute_l1_f, gains_from_k, ObserverGains};
use fauio_core::{DMatrix, DVector};

/// Two-state plant with `C_bar = I`, so every gain is known in closed form.
pub fn small_plant() -> PlantModel {
    small_plant_with_g(DMatrix::from_column_slice(2, 1, &[0.0, 0.5]))
}

pub fn small_plant_with_g(g: DMatrix<f64>) -> PlantModel {
    PlantModel::new(
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -3.0]),
        DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
        DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
        g,
        DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
        DMatrix::from_column_slice(3, 1, &[0.0, 0.0, 1.0]),
        None,
        None,
        vec![DMatrix::identity(2, 2)],
        DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
    )
    .unwrap()
}

/// `K = L1 A_zeta + 5 I` so that `N = -5 I`; `beta = 1`, `L2 = [0 4 0]`.
pub fn hand_gains(plant: &PlantModel) -> (DescriptorModel, ObserverGains) {
    let desc = augment_descriptor(plant);
    let (l1, f, _) = compute_l1_f(&desc).unwrap();
    let k = &l1 * &desc.a_zeta + DMatrix::identity(3, 3) * 5.0;
    let l2 = DMatrix::from_row_slice(1, 3, &[0.0, 4.0, 0.0]);
    let gains = gains_from_k(&desc, &l1, &f, k, l2, 1.0);
    (desc, gains)
}

pub fn quiet_scenario(horizon: f64, dt: f64) -> ScenarioConfig {
    ScenarioConfig {
        name: "test".into(),
        horizon,
        dt,
        x0: DVector::from_column_slice(&[0.3, -0.2]),
        eta0: None,
        fa_hat0: DVector::zeros(1),
        fault_a: VectorScript::zeros(1),
        fault_s: VectorScript::zeros(1),
        disturbance: VectorScript::zeros(0),
        input: VectorScript::zeros(1),
        filter: FilterTau::Seconds(0.02),
    }
}
