mod common;

use common::{hand_gains, small_plant};
use fauio_core::linalg::{block_diag, hstack, vstack};
use fauio_core::lmi::{build_sigma11, build_x, Assignment, DecisionLayout, FixedScalars, LmiProblem, Theorem};
use fauio_core::model::augment_descriptor;
use fauio_core::polytope::{basis, enumerate_vertices};
use fauio_core::sdp::{verify_certificate, CertificateTolerance};
use fauio_core::synth::{a_e, a_e_tilde, compute_l1_f, t_e, t_e_inv, vertex_matrix};
use fauio_core::{robot, DMatrix};

fn identity_point(layout: &DecisionLayout) -> Vec<f64> {
    let k = layout.z_dim();
    layout.pack(&Assignment {
        p1: DMatrix::identity(layout.n_new, layout.n_new),
        p2: DMatrix::identity(layout.a1, layout.a1),
        r1: DMatrix::zeros(layout.p, layout.n_new),
        r2: DMatrix::zeros(layout.p, layout.a1),
        z: DMatrix::identity(k, k),
        mu: 0.0,
    })
}

#[test]
fn robot_problem_dimensions() {
    let plant = robot::plant();
    let desc = augment_descriptor(&plant);
    let (l1, f, _) = compute_l1_f(&desc).unwrap();
    let v = enumerate_vertices(&plant.lipschitz_bounds).unwrap();
    let one = LmiProblem::build(&desc, &l1, None, v.clone(), Theorem::One, robot::theorem1_scalars()).unwrap();
    let two = LmiProblem::build(&desc, &l1, Some(&f), v, Theorem::Two, robot::theorem2_scalars()).unwrap();
    assert_eq!(one.constraint_size(), 28);
    assert_eq!(two.constraint_size(), 37);
    assert_eq!(one.vertex_constraints.len(), 2);
    assert_eq!(one.layout.n_vars(), 135);
    assert_eq!(one.layout.z_scalar_count(), 100);
    for c in one.vertex_constraints.iter().chain(&two.vertex_constraints) {
        assert!(c.asymmetry() < 1e-12);
    }
}

#[test]
fn sigma11_at_identity_point() {
    let plant = small_plant();
    let desc = augment_descriptor(&plant);
    let (l1, _, _) = compute_l1_f(&desc).unwrap();
    let layout = DecisionLayout::new(3, 1, 3, 1, 2, FixedScalars { epsilon: 0.1, delta: None, beta: 1.0 });
    let x = identity_point(&layout);
    let got = build_sigma11(&desc, &l1, &layout).unwrap().eval(&x);
    let la = &l1 * &desc.a_zeta;
    let le = &l1 * &desc.e_f;
    let top = hstack(&[&(&la + la.transpose()), &le]);
    let bottom = hstack(&[&le.transpose(), &DMatrix::zeros(1, 1)]);
    let expected = vstack(&[&top, &bottom]) + DMatrix::identity(4, 4);
    assert!((got - expected).norm() < 1e-12);
}

#[test]
fn x_rows_carry_lgh() {
    let plant = small_plant();
    let desc = augment_descriptor(&plant);
    let (l1, _, _) = compute_l1_f(&desc).unwrap();
    let layout = DecisionLayout::new(3, 1, 3, 1, 2, FixedScalars { epsilon: 0.1, delta: None, beta: 1.0 });
    let x = identity_point(&layout);
    let got = build_x(&desc, &l1, &layout).unwrap().eval(&x);
    assert_eq!(got.shape(), (4, 4));
    for j in 0..2 {
        let h = basis(1, j + 1, 1, 2).unwrap().matrix;
        let lgh = (&l1 * &desc.g * h).transpose();
        let rows = got.rows(2 * j, 2);
        assert!((rows.columns(0, 3) - &lgh).norm() < 1e-12);
        assert!(rows.column(3).norm() < 1e-12);
    }
}

#[test]
fn identity_point_is_rejected() {
    // sigma11 at P1 = I carries + I on its diagonal, so the vertex LMI fails
    // while P1 itself is positive definite.
    let plant = small_plant();
    let desc = augment_descriptor(&plant);
    let (l1, _, _) = compute_l1_f(&desc).unwrap();
    let v = enumerate_vertices(&plant.lipschitz_bounds).unwrap();
    let fixed = FixedScalars { epsilon: 0.1, delta: None, beta: 1.0 };
    let problem = LmiProblem::build(&desc, &l1, None, v, Theorem::One, fixed).unwrap();
    let x = identity_point(&problem.layout);
    let report = verify_certificate(&problem, &x, CertificateTolerance::default());
    assert!(!report.passed());
    assert!(report.lambda_min_p1 > 0.0);
}

#[test]
fn error_coordinates_transform() {
    let plant = small_plant();
    let (desc, g) = hand_gains(&plant);
    let i = DMatrix::identity(4, 4);
    assert!((t_e(&g, &desc) * t_e_inv(&g, &desc) - &i).norm() < 1e-12);
    let zero = DMatrix::zeros(1, 2);
    assert!((vertex_matrix(&g, &desc, &zero).unwrap() - a_e_tilde(&g, &desc)).norm() < 1e-12);
    assert!((t_e(&g, &desc) * a_e_tilde(&g, &desc) - a_e(&g, &desc)).norm() < 1e-12);
}

#[test]
fn vertex_matrix_adds_secant_term() {
    let plant = small_plant();
    let (desc, g) = hand_gains(&plant);
    let vertex = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
    let diff = vertex_matrix(&g, &desc, &vertex).unwrap() - a_e_tilde(&g, &desc);
    let h = basis(1, 1, 1, 2).unwrap().matrix;
    let term = &g.l1 * &desc.g * h * &desc.h[0] * &desc.t;
    let expected = t_e_inv(&g, &desc) * block_diag(&[&term, &DMatrix::zeros(1, 1)]);
    assert!((diff - expected).norm() < 1e-12);
}
