mod common;

use chreach::baselines::{check_containment, monte_carlo_rollouts};
use chreach::geometry::{hausdorff, sample_sphere, HullVertices, LambdaMode, Matrix, SmoothConvexSet, SphereScheme, Vector};
use chreach::reach::{InitialSet, TimeGrid};
use chreach::relax::{complete_basis, estimate_hulls_fullrank_relax, estimate_hulls_rect, EpsExtension, RectSpec};
use chreach::systems::{Dubins, LinearSystem};
use chreach::Error;
use common::v;
use proptest::prelude::*;

fn box_support(half: &Vector, d: &Vector) -> f64 {
    half.iter().zip(d.iter()).map(|(h, c)| h * c.abs()).sum()
}

fn box_hull(half: &Vector) -> HullVertices {
    let (a, b) = (half[0], half[1]);
    HullVertices::from_points(vec![v(&[a, b]), v(&[-a, b]), v(&[-a, -b]), v(&[a, -b])]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// `ẋ = w` with box `W` and box `X0`: the reachable set at `t` is the box
    /// of half-widths `δx₀ + tδw`, sandwiched by the two λ-ball hulls.
    #[test]
    fn lambda_hulls_sandwich_the_box_reachable_set(
        lambda in 2.0f64..32.0,
        dw in prop::array::uniform2(0.05f64..1.0),
        dx in prop::array::uniform2(0.05f64..1.0),
    ) {
        let sys = LinearSystem::single_integrator(2);
        let spec = RectSpec::new(v(&dw), Vector::zeros(2), v(&dx)).unwrap();
        let dirs = sample_sphere(2, 64, SphereScheme::UniformAngle).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let under = estimate_hulls_rect(&sys, &spec, lambda, LambdaMode::Under, &dirs, &grid).unwrap();
        let over = estimate_hulls_rect(&sys, &spec, lambda, LambdaMode::Over, &dirs, &grid).unwrap();
        for k in 0..=10 {
            let half = v(&dx) + v(&dw) * grid.time(k);
            for p in under.hulls[k].points() {
                prop_assert!(p[0].abs() <= half[0] + 1e-9 && p[1].abs() <= half[1] + 1e-9);
            }
            for d in &dirs {
                let s = over.hulls[k].points().iter().map(|p| p.dot(d.as_vector())).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(s >= box_support(&half, d.as_vector()) - 1e-9);
            }
        }
    }
}

#[test]
fn lambda_hulls_approach_the_box() {
    let sys = LinearSystem::single_integrator(2);
    let spec = RectSpec::new(v(&[0.3, 0.1]), Vector::zeros(2), v(&[0.2, 0.4])).unwrap();
    let dirs = sample_sphere(2, 512, SphereScheme::UniformAngle).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
    let truth = box_hull(&v(&[0.5, 0.5]));
    let mut previous = f64::INFINITY;
    for lambda in [4.0, 8.0, 16.0] {
        let under = estimate_hulls_rect(&sys, &spec, lambda, LambdaMode::Under, &dirs, &grid).unwrap();
        let d = hausdorff(under.last(), &truth, 1e-12);
        assert!(d < previous, "lambda {lambda}: {d} after {previous}");
        previous = d;
    }
}

#[test]
fn rect_spec_rejects_degenerate_boxes() {
    assert!(RectSpec::new(v(&[0.0, 1.0]), Vector::zeros(2), v(&[1.0, 1.0])).is_err());
    assert!(RectSpec::new(v(&[1.0, 1.0]), Vector::zeros(3), v(&[1.0, 1.0])).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn completed_basis_is_invertible(entries in prop::collection::vec(-1.0f64..1.0, 8), seed in 0u64..100) {
        let g = Matrix::from_row_slice(4, 2, &entries);
        let sv = g.singular_values();
        prop_assume!(sv.min() > 1e-3);
        let extra = complete_basis(&g, seed).unwrap();
        prop_assert_eq!(extra.shape(), (4, 2));
        for c in extra.column_iter() {
            prop_assert!((c.norm() - 1.0).abs() < 1e-12);
        }
        let full = Matrix::from_columns(&[g.column(0).into_owned(), g.column(1).into_owned(), extra.column(0).into_owned(), extra.column(1).into_owned()]);
        prop_assert!(full.singular_values().min() > 1e-7);
    }
}

#[test]
fn basis_completion_rejects_rank_deficient_and_square_inputs() {
    let g = Matrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
    assert!(matches!(complete_basis(&g, 0), Err(Error::Assumption(_))));
    assert!(complete_basis(&Matrix::identity(2, 2), 0).is_err());
}

/// The lifted set contains `W × {0}`, so the relaxed hulls cover every
/// trajectory of the rank-deficient system up to the hull error.
#[test]
fn relaxed_dubins_hulls_contain_the_original_trajectories() {
    let g = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let base = Dubins::new(0.5, 0.5, g.clone()).unwrap();
    let wset = SmoothConvexSet::ball(Vector::zeros(2), 0.01).unwrap();
    let x0 = InitialSet::Ovaloid(
        SmoothConvexSet::ellipsoid(Vector::zeros(3), Matrix::from_diagonal(&v(&[1e-3, 1e-3, 1e-4]))).unwrap(),
    );
    let grid = TimeGrid::new(0.0, 2.0, 40).unwrap();
    let dirs = sample_sphere(3, 200, SphereScheme::Fibonacci).unwrap();
    let extra = complete_basis(&g, 0).unwrap();
    let rollouts = monte_carlo_rollouts(&base, &wset, &x0, 300, 4, &grid).unwrap();
    let mut finals = Vec::new();
    for eps in [0.2, 0.1] {
        let ext = EpsExtension::new(base.clone(), extra.clone(), eps).unwrap();
        let est = estimate_hulls_fullrank_relax(&ext, &wset, &x0, &dirs, &grid).unwrap();
        let report = check_containment(&est, &rollouts, 3e-3).unwrap();
        assert_eq!(report.violations, 0, "eps {eps}: {report:?}");
        finals.push(est.last().clone());
    }
    assert!(hausdorff(&finals[0], &finals[1], 1e-12) > 0.0);
}

#[test]
fn extension_input_matrix_appends_scaled_columns() {
    let g = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let extra = complete_basis(&g, 0).unwrap();
    let ext = EpsExtension::new(Dubins::new(0.5, 0.5, g).unwrap(), extra, 0.05).unwrap();
    use chreach::systems::System;
    assert_eq!(ext.disturbance_dim(), 3);
    assert!((ext.min_singular_value(0.0, &v(&[1.0, -2.0, 0.7])) - 0.05).abs() < 1e-12);
    assert!(EpsExtension::new(Dubins::new(0.5, 0.5, Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0])).unwrap(), Matrix::zeros(3, 1), 0.1).is_err());
}
