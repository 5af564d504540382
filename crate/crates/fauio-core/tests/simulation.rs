mod common;

use common::{hand_gains, quiet_scenario, small_plant, small_plant_with_g};
use fauio_core::sim::integrate::{filter_is_stable, filtered_error_matrix};
use fauio_core::sim::{integrate, nonlinearity, Expr, FilterTau, Script, VectorScript};
use fauio_core::{DMatrix, DVector};

#[test]
fn hand_gains_have_expected_structure() {
    let plant = small_plant();
    let (desc, g) = hand_gains(&plant);
    assert!((&g.n + DMatrix::identity(3, 3) * 5.0).norm() < 1e-12);
    assert!((&g.j - (&g.n * &g.f + &g.k)).norm() < 1e-12);
    assert_eq!(desc.c_bar, DMatrix::identity(3, 3));
    assert!(filter_is_stable(&plant, &g, 1e-3, 20.0).unwrap());
}

#[test]
fn matched_start_without_faults_keeps_zero_error() {
    let plant = small_plant();
    let (_, g) = hand_gains(&plant);
    let sin = nonlinearity("sin", 1, None).unwrap();
    let mut sc = quiet_scenario(5.0, 1e-3);
    sc.input = VectorScript::new(vec![Script::always(Expr::Sin { amp: 1.0, freq: 2.0, phase: 0.0 })]);
    let y0 = &plant.c * &sc.x0;
    let zeta0 = DVector::from_column_slice(&[sc.x0[0], sc.x0[1], 0.0]);
    sc.eta0 = Some(zeta0 - &g.f * y0);
    let tr = integrate(&plant, &g, sin.as_ref(), &sc).unwrap();
    let worst = (0..tr.len()).map(|k| tr.error(k).amax()).fold(0.0, f64::max);
    assert!(worst <= 1e-9, "error drifted to {worst:e}");
    assert!(tr.x(tr.len() - 1).iter().any(|v| v.abs() > 1e-3), "plant should be excited");
}

#[test]
fn zeta_hat_is_eta_plus_f_y() {
    let plant = small_plant();
    let (_, g) = hand_gains(&plant);
    let sin = nonlinearity("sin", 1, None).unwrap();
    let mut sc = quiet_scenario(2.0, 1e-3);
    sc.fault_a = VectorScript::new(vec![Script::window(0.5, 1.5, Expr::Const(1.0))]);
    sc.fault_s = VectorScript::new(vec![Script::window(1.0, 2.0, Expr::Const(-0.5))]);
    let tr = integrate(&plant, &g, sin.as_ref(), &sc).unwrap();
    for k in 0..tr.len() {
        let eta = DVector::from_column_slice(tr.eta(k));
        let y = DVector::from_column_slice(tr.y(k));
        let rebuilt = eta + &g.f * y;
        let diff = (rebuilt - DVector::from_column_slice(tr.zeta_hat(k))).amax();
        assert!(diff <= 1e-12, "sample {k}: {diff:e}");
    }
}

#[test]
fn linear_error_matches_matrix_exponential() {
    let plant = small_plant_with_g(DMatrix::zeros(2, 1));
    let (desc, g) = hand_gains(&plant);
    let zero = nonlinearity("zero", 1, None).unwrap();
    let tau = 0.02;
    let mut sc = quiet_scenario(2.0, 1e-3);
    sc.fa_hat0 = DVector::from_column_slice(&[0.4]);
    sc.filter = FilterTau::Seconds(tau);
    let tr = integrate(&plant, &g, zero.as_ref(), &sc).unwrap();

    let m = filtered_error_matrix(&desc, &g, &DMatrix::zeros(1, 2), tau).unwrap();
    let e_zeta0 = DVector::from_column_slice(&[0.3, -0.2, 0.0]);
    let mut s0 = DVector::zeros(7);
    s0.rows_mut(0, 3).copy_from(&e_zeta0);
    s0[3] = -0.4;
    s0.rows_mut(4, 3).copy_from(&(&desc.c_bar * &e_zeta0));
    for k in [100, 500, 1000, 2000] {
        let t = tr.time[k];
        let exact = (&m * t).exp() * &s0;
        let sim = tr.error(k);
        let diff = (sim - exact.rows(0, 4)).amax();
        assert!(diff <= 1e-8, "t = {t}: {diff:e}");
    }
}

fn final_state(dt: f64) -> DVector<f64> {
    let plant = small_plant();
    let (_, g) = hand_gains(&plant);
    let sin = nonlinearity("sin", 1, None).unwrap();
    let mut sc = quiet_scenario(1.0, dt);
    sc.filter = FilterTau::Seconds(0.05);
    sc.fa_hat0 = DVector::from_column_slice(&[0.2]);
    sc.fault_a = VectorScript::new(vec![Script::always(Expr::Sin { amp: 1.0, freq: 3.0, phase: 0.1 })]);
    sc.fault_s = VectorScript::new(vec![Script::always(Expr::Cos { amp: 0.5, freq: 2.0, phase: 0.0 })]);
    sc.input = VectorScript::new(vec![Script::always(Expr::Sin { amp: 1.0, freq: 1.0, phase: 0.0 })]);
    let tr = integrate(&plant, &g, sin.as_ref(), &sc).unwrap();
    let k = tr.len() - 1;
    let mut out: Vec<f64> = tr.x(k).to_vec();
    out.extend_from_slice(tr.eta(k));
    out.extend_from_slice(tr.fa_hat(k));
    DVector::from_vec(out)
}

#[test]
fn integrator_is_fourth_order() {
    let (a, b, c) = (final_state(0.02), final_state(0.01), final_state(0.005));
    let coarse = (&a - &b).amax();
    let fine = (&b - &c).amax();
    let ratio = coarse / fine;
    assert!(ratio >= 8.0, "ratio {ratio} ({coarse:e} / {fine:e})");
}

#[test]
fn step_actuator_fault_is_tracked() {
    let plant = small_plant();
    let (_, g) = hand_gains(&plant);
    let sin = nonlinearity("sin", 1, None).unwrap();
    let mut sc = quiet_scenario(30.0, 1e-3);
    sc.filter = FilterTau::Factor(20.0);
    sc.fault_a = VectorScript::new(vec![Script::window(1.0, 30.0, Expr::Const(1.0))]);
    let tr = integrate(&plant, &g, sin.as_ref(), &sc).unwrap();
    let last = tr.len() - 2;
    assert!(tr.fa_error(last, 0).abs() < 1e-3, "fa_hat did not converge: {}", tr.fa_hat(last)[0]);
}
