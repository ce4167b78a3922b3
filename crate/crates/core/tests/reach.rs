mod common;

use std::f64::consts::PI;

use chreach::baselines::{check_containment, monte_carlo_rollouts};
use chreach::geometry::{
    covering_radius, distance_to_hull, hausdorff, sample_sphere, Direction, Matrix, SmoothConvexSet, SphereScheme, Vector,
};
use chreach::reach::{
    error_bounds, estimate_hulls, extremal_trajectory, initial_pair, integrate_costate, lipschitz_estimates,
    replay_disturbances, rk4_integrate, InitialSet, TimeGrid,
};
use chreach::systems::{Dubins, LinearSystem};
use chreach::Error;
use common::{attraction_repulsion, benchmark_grid, benchmarks, v};
use proptest::prelude::*;

#[test]
fn rk4_reproduces_the_exponential() {
    let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
    let xs = rk4_integrate(&grid, v(&[1.0]), |_, x| Ok(-x)).unwrap();
    assert!((xs[100][0] - (-1f64).exp()).abs() <= 1e-9);
}

#[test]
fn rk4_reproduces_the_rotation() {
    let grid = TimeGrid::new(0.0, PI, 200).unwrap();
    let a = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let x0 = v(&[0.3, -1.2]);
    let xs = rk4_integrate(&grid, x0.clone(), |_, x| Ok(&a * x)).unwrap();
    assert!((&xs[200] + &x0).amax() <= 1e-7);
}

/// `ẋ = w`, `‖w‖ ≤ r` from a point: the reachable set at `t` is the disk of
/// radius `rt`, whose inscribed `M`-gon is `rt(1 − cos(π/M))` away.
#[test]
fn single_integrator_hull_is_the_inscribed_polygon() {
    let sys = LinearSystem::single_integrator(2);
    let r = 0.5;
    let wset = SmoothConvexSet::ball(Vector::zeros(2), r).unwrap();
    let grid = TimeGrid::new(0.0, 2.0, 20).unwrap();
    let m = 32;
    let est = estimate_hulls(&sys, &wset, &InitialSet::Singleton(Vector::zeros(2)), &sample_sphere(2, m, SphereScheme::UniformAngle).unwrap(), &grid).unwrap();
    for k in 1..=20 {
        let radius = r * grid.time(k);
        for p in est.hulls[k].points() {
            assert!((p.norm() - radius).abs() < 1e-12);
        }
        let gap = radius * (1.0 - (PI / m as f64).cos());
        let mid = v(&[radius * (PI / m as f64).cos(), radius * (PI / m as f64).sin()]);
        let d = distance_to_hull(&(mid.normalize() * radius), &est.hulls[k], 1e-12);
        assert!((d - gap).abs() < 1e-9, "{d} vs {gap}");
    }
}

/// Rotation plus a ball disturbance: the reachable set is a disk of radius
/// `rt` around the rotated initial point.
#[test]
fn rotating_frame_hull_tracks_the_rotated_disk() {
    let a = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let sys = LinearSystem::new(a, Matrix::identity(2, 2)).unwrap();
    let r = 0.2;
    let wset = SmoothConvexSet::ball(Vector::zeros(2), r).unwrap();
    let x0 = v(&[1.0, 0.0]);
    let grid = TimeGrid::new(0.0, 1.5, 300).unwrap();
    let dirs = sample_sphere(2, 256, SphereScheme::UniformAngle).unwrap();
    let est = estimate_hulls(&sys, &wset, &InitialSet::Singleton(x0), &dirs, &grid).unwrap();
    let t = grid.tf;
    let center = v(&[t.cos(), t.sin()]);
    let disk: Vec<Vector> = (0..4096)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / 4096.0;
            &center + v(&[a.cos(), a.sin()]) * (r * t)
        })
        .collect();
    let truth = chreach::geometry::convex_hull_2d(&disk).unwrap();
    let d = hausdorff(est.last(), &truth, 1e-12);
    assert!(d < 2.0 * r * t * (PI / 256.0).powi(2), "{d}");
}

#[test]
fn extremal_states_are_reproduced_by_replaying_their_disturbances() {
    for (sys, wset, x0) in benchmarks() {
        let n = sys.state_dim();
        let grid = benchmark_grid();
        let mut rng = chreach::rng::seeded(3);
        for d in chreach::geometry::sample_sphere_random(n, 4, &mut rng) {
            let tr = extremal_trajectory(sys.as_ref(), &wset, &x0, &d, &grid).unwrap();
            let replay = replay_disturbances(sys.as_ref(), tr.x[0].clone(), &grid, &tr.stage_w).unwrap();
            assert_eq!(replay, tr.x, "{}", sys.label());
            for w in &tr.w {
                assert!(wset.level(w).is_finite());
                assert!(wset.contains(w, 1e-8));
            }
        }
    }
}

#[test]
fn costate_scale_does_not_change_the_state() {
    for (sys, wset, x0) in benchmarks() {
        let grid = benchmark_grid();
        let d = Direction::normalize(Vector::from_fn(sys.state_dim(), |i, _| 1.0 + i as f64)).unwrap();
        let (xi, pi) = initial_pair(&d, &x0).unwrap();
        let (reference, _, _) = integrate_costate(sys.as_ref(), &wset, xi.clone(), pi.clone(), &grid).unwrap();
        for c in [0.5, 3.0] {
            let (xs, _, _) = integrate_costate(sys.as_ref(), &wset, xi.clone(), &pi * c, &grid).unwrap();
            let dev = xs.iter().zip(&reference).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
            assert!(dev <= 1e-9, "{}: {dev:e}", sys.label());
        }
    }
}

#[test]
fn error_bounds_follow_their_formulas() {
    let b = error_bounds(&[0.0, 2.0, 4.0], &[0.0, 1.0, 10.0], 0.1);
    assert_eq!(b.naive, vec![0.0, 0.2, 0.4]);
    let want = [0.0, 3.0 * 0.01 / 2.0, 14.0 * 0.01 / 2.0];
    for (a, w) in b.quadratic.iter().zip(want) {
        assert!((a - w).abs() < 1e-15);
    }
}

#[test]
fn lipschitz_estimates_vanish_at_a_point_initial_set() {
    let sys = attraction_repulsion();
    let wset = SmoothConvexSet::ball(Vector::zeros(2), 0.1).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 50).unwrap();
    let est = lipschitz_estimates(&sys, &wset, &InitialSet::Singleton(v(&[0.0, -1.5])), &grid, 64, 0).unwrap();
    assert_eq!(est.lbar[0], 0.0);
    assert!(est.lbar[50] > 0.0 && est.hbar[50] > 0.0);
    // The free-space reachable disk grows like 0.1 t, so L_t ≈ 0.1 t early on.
    assert!((est.lbar[10] - 0.1 * grid.time(10)).abs() < 0.05 * grid.time(10));
}

#[test]
fn padded_hulls_contain_sampled_trajectories() {
    let sys = attraction_repulsion();
    let wset = SmoothConvexSet::ball(Vector::zeros(2), 0.1).unwrap();
    let x0 = InitialSet::Singleton(v(&[0.0, -1.5]));
    let grid = TimeGrid::new(0.0, 2.0, 100).unwrap();
    let dirs = sample_sphere(2, 64, SphereScheme::UniformAngle).unwrap();
    let lip = lipschitz_estimates(&sys, &wset, &x0, &grid, 200, 1).unwrap();
    let delta = covering_radius(&dirs, 10_000, 1).unwrap();
    let est = estimate_hulls(&sys, &wset, &x0, &dirs, &grid)
        .unwrap()
        .with_padding(error_bounds(&lip.lbar, &lip.hbar, delta).quadratic)
        .unwrap();
    let rollouts = monte_carlo_rollouts(&sys, &wset, &x0, 500, 2, &grid).unwrap();
    let report = check_containment(&est, &rollouts, 3e-3).unwrap();
    assert_eq!(report.violations, 0, "{report:?}");
}

#[test]
fn rank_deficient_inputs_need_a_relaxation() {
    let g = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let sys = Dubins::new(0.5, 0.5, g).unwrap();
    let wset = SmoothConvexSet::ball(Vector::zeros(2), 1e-2).unwrap();
    let d = Direction::new(v(&[0.0, 1.0, 0.0])).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
    let err = extremal_trajectory(&sys, &wset, &InitialSet::Singleton(Vector::zeros(3)), &d, &grid);
    assert!(matches!(err, Err(Error::Assumption(_))));
}

#[test]
fn vanishing_costates_are_reported() {
    let sys = LinearSystem::single_integrator(2);
    let wset = SmoothConvexSet::ball(Vector::zeros(2), 1.0).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
    let err = integrate_costate(&sys, &wset, Vector::zeros(2), Vector::zeros(2), &grid);
    assert!(matches!(err, Err(Error::SingularCostate { .. })));
}

#[test]
fn invalid_grids_are_rejected() {
    assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
    assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
    assert!(TimeGrid::new(0.0, f64::NAN, 3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Every extremal state lies on the boundary of the true reachable disk
    /// of the single integrator.
    #[test]
    fn single_integrator_extremals_lie_on_the_disk(angle in 0.0f64..(2.0 * PI), r in 0.1f64..2.0, cx in -1.0f64..1.0) {
        let sys = LinearSystem::single_integrator(2);
        let wset = SmoothConvexSet::ball(Vector::zeros(2), r).unwrap();
        let x0 = InitialSet::Ovaloid(SmoothConvexSet::ball(v(&[cx, 0.0]), 0.3).unwrap());
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let d = Direction::new(v(&[angle.cos(), angle.sin()])).unwrap();
        let tr = extremal_trajectory(&sys, &wset, &x0, &d, &grid).unwrap();
        for (k, x) in tr.x.iter().enumerate() {
            let radius = 0.3 + r * grid.time(k);
            prop_assert!(((x - v(&[cx, 0.0])).norm() - radius).abs() < 1e-12);
        }
    }
}
