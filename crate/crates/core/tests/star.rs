use std::sync::Arc;

use dpg_adapt::assembly::{Discretization, Problem, SpaceSpec, TestNorm};
use dpg_adapt::mesh::unit_square;
use dpg_adapt::solve::{assemble, SolverKind};
use dpg_adapt::star::{
    dwr_estimate, evaluate_target, goal_indicator, solve_dual, target_vector, Target,
};

fn setup() -> (dpg_adapt::mesh::Triangulation, Problem, Discretization) {
    let mesh = unit_square(4).unwrap();
    let pb = Problem::new(
        0.2,
        [1.0, 0.5],
        Arc::new(|x| 1.0 + x[0] * x[1]),
        Arc::new(|_| 0.0),
    )
    .unwrap();
    let disc = Discretization::new(SpaceSpec::new(2, 2, TestNorm::Scaled).unwrap()).unwrap();
    (mesh, pb, disc)
}

#[test]
fn discrete_dual_is_orthogonal_to_residual() {
    let (mesh, pb, disc) = setup();
    let mut sys = assemble(&mesh, &pb, &disc).unwrap();
    let x = sys.solve(SolverKind::Normal).unwrap();
    let target = Target::Volume(Arc::new(|x| (-(x[0] - 0.5).powi(2) * 10.0).exp()));
    let j = target_vector(&mesh, &disc, &sys, &target);
    let dual = solve_dual(&mut sys, &j).unwrap();
    let scale = evaluate_target(&j, &x).abs();
    assert!(dwr_estimate(&sys, &x, &dual.z).unwrap() < 1e-10 * scale.max(1.0));
}

#[test]
fn dual_represents_target_differences() {
    let (mesh, pb, disc) = setup();
    let mut sys = assemble(&mesh, &pb, &disc).unwrap();
    let x = sys.solve(SolverKind::Normal).unwrap();
    for target in [
        Target::Volume(Arc::new(|x| x[0] + 2.0 * x[1])),
        Target::BoundaryFlux(vec![(2, 1.0), (3, -0.5)]),
    ] {
        let j = target_vector(&mesh, &disc, &sys, &target);
        let dual = solve_dual(&mut sys, &j).unwrap();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| v + 0.01 * ((i as f64) * 0.37).sin())
            .collect();
        let diff = evaluate_target(&j, &y) - evaluate_target(&j, &x);
        let dwr = dwr_estimate(&sys, &y, &dual.z).unwrap();
        assert!(
            (dwr - diff.abs()).abs() <= 1e-9 * diff.abs().max(1e-3),
            "{target:?}: {dwr} vs {diff}"
        );
    }
}

#[test]
fn zero_target_gives_zero_dual() {
    let (mesh, pb, disc) = setup();
    let mut sys = assemble(&mesh, &pb, &disc).unwrap();
    let j = target_vector(&mesh, &disc, &sys, &Target::BoundaryFlux(vec![]));
    let dual = solve_dual(&mut sys, &j).unwrap();
    assert!(dual.xi.iter().all(|v| *v == 0.0));
    assert!(goal_indicator(&[1.0, 2.0], &[3.0]).is_err());
    assert_eq!(
        goal_indicator(&[1.0, 2.0], &[3.0, 0.5]).unwrap(),
        vec![3.0, 1.0]
    );
}
