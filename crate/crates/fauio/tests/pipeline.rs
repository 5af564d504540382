use std::sync::OnceLock;

use fauio::matio::{format_matrix, parse_matrix, GainSet};
use fauio::pipeline::{grid_search, simulate, solve_instance, SynthOptions, Synthesis};
use fauio::ClarabelSolver;
use fauio_core::lmi::{assemble_thm2, Theorem};
use fauio_core::sdp::SolveStatus;
use fauio_core::sim::{nonlinearity, preset};
use fauio_core::{linalg, robot, DMatrix};
use proptest::prelude::*;

fn theorem2() -> &'static Synthesis {
    static S: OnceLock<Synthesis> = OnceLock::new();
    S.get_or_init(|| {
        let opts = SynthOptions::new(Theorem::Two, robot::theorem2_scalars()).unwrap();
        solve_instance(&robot::plant(), &opts, &ClarabelSolver::default()).unwrap()
    })
}

#[test]
fn singleton_grid_matches_direct_solve() {
    let plant = robot::plant();
    let opts = SynthOptions::new(Theorem::One, robot::theorem1_scalars()).unwrap();
    let solver = ClarabelSolver::default();
    let direct = solve_instance(&plant, &opts, &solver).unwrap();
    let grid = grid_search(&plant, &opts, &[0.1], &[], &solver).unwrap();
    assert_eq!(grid.table.len(), 1);
    let best = grid.best_point();
    assert_eq!(best.status, SolveStatus::Optimal);
    assert_eq!(best.mu, direct.solution.mu);
}

#[test]
fn interior_of_the_box_is_certified() {
    // The vertex LMIs are affine in the secant matrix, so feasibility at the
    // corners carries over to every point of the box.
    let s = theorem2();
    assert!(s.accepted());
    let layout = &s.problem.layout;
    let plant = robot::plant();
    for k in 0..50 {
        let theta = (k as f64 + 0.5) / 50.0;
        let phi = &plant.lipschitz_bounds * theta;
        let m = assemble_thm2(&s.desc, &s.l1, &s.f, layout, &phi).unwrap().eval(&s.solution.x);
        let lmax = linalg::lambda_max(&m);
        assert!(lmax <= 1e-6 * m.norm(), "theta {theta}: lambda_max {lmax:e}");
    }
}

#[test]
fn doubled_disturbance_keeps_the_attenuation_bound() {
    let s = theorem2();
    let set = GainSet::new(s.gains.clone(), &s.solution.assignment);
    let g = nonlinearity("sin", 1, None).unwrap();
    let mut sc = preset("robot-case2").unwrap();
    sc.disturbance = sc.disturbance.scaled(2.0);
    let (_, m) = simulate(&robot::plant(), g.as_ref(), &set, &sc).unwrap();
    assert!(m.hinf.bound_holds(), "{:?}", m.hinf);
}

proptest! {
    #[test]
    fn matrix_text_round_trip(
        shape in (0usize..5, 0usize..5),
        seed in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 25),
    ) {
        let (r, c) = shape;
        let m = DMatrix::from_fn(r, c, |i, j| seed[i * 5 + j]);
        let text = format_matrix(&m, Some("round trip"));
        let back = parse_matrix(&text, std::path::Path::new("mem")).unwrap();
        prop_assert_eq!(back, m);
    }
}
