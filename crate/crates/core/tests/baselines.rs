mod common;

use chreach::baselines::{
    check_tube, estimate_step_hessian_bound, lipschitz_tube, monte_carlo_discrete, monte_carlo_rollouts, randup_hulls,
    DiscreteSystem, DisturbanceMode,
};
use chreach::geometry::{distance_to_hull, sample_sphere, Matrix, SmoothConvexSet, SphereScheme, Vector};
use chreach::reach::{estimate_hulls, InitialSet, TimeGrid};
use chreach::systems::LinearSystem;
use common::{attraction_repulsion, v};

/// RandUP states are reachable, so they sit inside the dense boundary hull up
/// to its inner-approximation error.
#[test]
fn randup_states_lie_inside_the_reachable_hull() {
    let sys = attraction_repulsion();
    let wset = SmoothConvexSet::ball(Vector::zeros(2), 0.1).unwrap();
    let x0 = InitialSet::Singleton(v(&[0.0, -1.5]));
    let dsys = DiscreteSystem::new(&sys, 0.0, 0.25, 8, 10, DisturbanceMode::Held).unwrap();
    let randup = randup_hulls(&dsys, &wset, &x0, 200, 7).unwrap();
    let grid = TimeGrid::new(0.0, 2.0, 80).unwrap();
    let truth = estimate_hulls(&sys, &wset, &x0, &sample_sphere(2, 2048, SphereScheme::UniformAngle).unwrap(), &grid).unwrap();
    for p in randup.last().points() {
        assert!(distance_to_hull(p, truth.last(), 1e-12) <= 1e-4);
    }
    assert_eq!(randup.hulls.len(), 9);
}

#[test]
fn held_discrete_rollouts_match_continuous_rollouts() {
    let sys = attraction_repulsion();
    let wset = SmoothConvexSet::ball(Vector::zeros(2), 0.1).unwrap();
    let x0 = InitialSet::Ovaloid(SmoothConvexSet::ball(v(&[0.0, -1.5]), 0.05).unwrap());
    let dsys = DiscreteSystem::new(&sys, 0.0, 0.1, 10, 1, DisturbanceMode::Held).unwrap();
    let a = monte_carlo_discrete(&dsys, &wset, &x0, 20, 11).unwrap();
    let b = monte_carlo_rollouts(&sys, &wset, &x0, 20, 11, &dsys.grid()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn rollouts_are_reproducible_and_seed_dependent() {
    let sys = attraction_repulsion();
    let wset = SmoothConvexSet::ball(Vector::zeros(2), 0.1).unwrap();
    let x0 = InitialSet::Singleton(v(&[0.0, -1.5]));
    let grid = TimeGrid::new(0.0, 1.0, 20).unwrap();
    let a = monte_carlo_rollouts(&sys, &wset, &x0, 10, 1, &grid).unwrap();
    assert_eq!(a, monte_carlo_rollouts(&sys, &wset, &x0, 10, 1, &grid).unwrap());
    assert_ne!(a, monte_carlo_rollouts(&sys, &wset, &x0, 10, 2, &grid).unwrap());
    assert!(monte_carlo_rollouts(&sys, &wset, &x0, 0, 1, &grid).is_err());
}

/// For linear dynamics `H̄ = 0` and the tube must hold every additive rollout.
#[test]
fn linear_tube_contains_additive_rollouts() {
    let a = Matrix::from_row_slice(2, 2, &[0.1, -1.0, 1.0, -0.3]);
    let sys = LinearSystem::new(a, Matrix::identity(2, 2)).unwrap();
    let dsys = DiscreteSystem::new(&sys, 0.0, 0.5, 12, 10, DisturbanceMode::Additive).unwrap();
    let x0 = v(&[1.0, 0.0]);
    let wset = SmoothConvexSet::ball(Vector::zeros(2), 0.05).unwrap();
    let tube = lipschitz_tube(&dsys, &x0, 0.05, 0.0).unwrap();
    let r = monte_carlo_discrete(&dsys, &wset, &InitialSet::Singleton(x0), 1000, 3).unwrap();
    let report = check_tube(&tube, &r, 1e-9).unwrap();
    assert_eq!(report.violations, 0, "{report:?}");
    assert_eq!(report.checked, 13 * 1000);
}

#[test]
fn nonlinear_tube_contains_additive_rollouts() {
    let sys = attraction_repulsion();
    let dsys = DiscreteSystem::new(&sys, 0.0, 0.25, 8, 10, DisturbanceMode::Additive).unwrap();
    let x0 = v(&[0.0, -1.5]);
    let nominal = dsys.nominal_rollout(&x0).unwrap();
    let mut hbar = 0.0f64;
    for (k, xk) in nominal.iter().enumerate().take(8) {
        hbar = hbar.max(estimate_step_hessian_bound(&dsys, k, xk, &Vector::from_element(2, 0.2), 100, 1e-3, k as u64).unwrap());
    }
    assert!(hbar > 0.0);
    let wset = SmoothConvexSet::ball(Vector::zeros(2), 0.02).unwrap();
    let tube = lipschitz_tube(&dsys, &x0, 0.02, hbar).unwrap();
    let r = monte_carlo_discrete(&dsys, &wset, &InitialSet::Singleton(x0), 1000, 5).unwrap();
    assert_eq!(check_tube(&tube, &r, 1e-9).unwrap().violations, 0);
}

#[test]
fn tube_boundary_points_lie_on_the_ellipsoids() {
    let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -0.5]);
    let sys = LinearSystem::new(a, Matrix::identity(2, 2)).unwrap();
    let dsys = DiscreteSystem::new(&sys, 0.0, 0.2, 5, 4, DisturbanceMode::Additive).unwrap();
    let tube = lipschitz_tube(&dsys, &v(&[0.5, 0.5]), 0.1, 0.0).unwrap();
    let dirs = sample_sphere(2, 40, SphereScheme::UniformAngle).unwrap();
    assert_eq!(tube.normalized_distance(0, &v(&[0.5, 0.5])), 0.0);
    assert_eq!(tube.normalized_distance(0, &v(&[0.5, 0.6])), f64::INFINITY);
    for k in 1..tube.len() {
        for p in tube.boundary_points(k, &dirs) {
            assert!((tube.normalized_distance(k, &p) - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn tube_requires_additive_disturbances() {
    let sys = LinearSystem::single_integrator(2);
    let held = DiscreteSystem::new(&sys, 0.0, 0.1, 3, 1, DisturbanceMode::Held).unwrap();
    assert!(lipschitz_tube(&held, &Vector::zeros(2), 0.1, 0.0).is_err());
    let additive = DiscreteSystem::new(&sys, 0.0, 0.1, 3, 1, DisturbanceMode::Additive).unwrap();
    assert!(lipschitz_tube(&additive, &Vector::zeros(2), -0.1, 0.0).is_err());
    assert!(DiscreteSystem::new(&sys, 0.0, 0.0, 3, 1, DisturbanceMode::Held).is_err());
    assert!(DiscreteSystem::new(&sys, 0.0, 0.1, 3, 0, DisturbanceMode::Held).is_err());
}
