mod common;

use chreach::geometry::{Matrix, Vector};
use chreach::reach::{rk4_integrate, TimeGrid};
use chreach::systems::{
    jacobian_check, smooth_cutoff, ControlSignal, Dubins, MlpPolicy, NeuralLoop, SpacecraftFull, SpacecraftOmega, System,
};
use common::{attraction_repulsion, benchmarks, v};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn benchmark_jacobians_match_finite_differences(
        t in 0.0f64..2.0,
        raw in prop::collection::vec(-1.0f64..1.0, 7),
        wraw in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        for (sys, _, x0) in benchmarks() {
            let n = sys.state_dim();
            // Probe near each benchmark's operating point.
            let x = x0.center() + Vector::from_column_slice(&raw[..n]) * 0.3;
            let w = Vector::from_column_slice(&wraw[..sys.disturbance_dim()]);
            let chk = jacobian_check(sys.as_ref(), t, &x, &w, 1e-4, 1e-7);
            prop_assert!(chk.passed(), "{}: {chk:?}", sys.label());
        }
    }

    #[test]
    fn full_attitude_jacobian_matches_finite_differences(raw in prop::collection::vec(-1.0f64..1.0, 7)) {
        let sys = SpacecraftFull::benchmark(ControlSignal::from_flat(0.0, 1.0, 3, &[0.05, -0.02, 0.01, 0.0, 0.03, -0.04]).unwrap());
        let x = Vector::from_column_slice(&raw) * 0.5;
        let chk = jacobian_check(&sys, 0.7, &x, &v(&[0.01, 0.0, -0.01]), 1e-4, 1e-7);
        prop_assert!(chk.passed(), "{chk:?}");
    }

    #[test]
    fn rank_deficient_dubins_jacobian(x in prop::collection::vec(-3.0f64..3.0, 3), w in prop::collection::vec(-1.0f64..1.0, 2)) {
        let g = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let sys = Dubins::new(0.5, 0.5, g).unwrap();
        let chk = jacobian_check(&sys, 0.0, &Vector::from_vec(x), &Vector::from_vec(w), 1e-5, 1e-8);
        prop_assert!(chk.passed(), "{chk:?}");
    }
}

#[test]
fn attraction_repulsion_is_smooth_across_the_cutoff_shells() {
    let sys = attraction_repulsion();
    let rc = sys.cutoff();
    for pole in [sys.attractor().clone(), sys.repeller().clone()] {
        for r in [rc, 2.0 * rc] {
            for angle in [0.3f64, 1.9, 4.0] {
                let dir = v(&[angle.cos(), angle.sin()]);
                let inner = &pole + &dir * (r - 1e-6);
                let outer = &pole + &dir * (r + 1e-6);
                let jump_f = (sys.drift(0.0, &inner) - sys.drift(0.0, &outer)).amax();
                let jump_j = (sys.drift_jacobian(0.0, &inner) - sys.drift_jacobian(0.0, &outer)).amax();
                // First-order changes over a 2e-6 gap, no jumps.
                assert!(jump_f <= 1e-4 && jump_j <= 1e-2, "r = {r}: {jump_f:e} {jump_j:e}");
            }
        }
    }
    let (s_in, ds_in) = smooth_cutoff(rc * (1.0 + 1e-9), rc);
    let (s_out, ds_out) = smooth_cutoff(2.0 * rc * (1.0 - 1e-9), rc);
    assert!(s_in <= 1e-8 && ds_in <= 1e-8 && (1.0 - s_out) <= 1e-8 && ds_out <= 1e-8);
    // Inside the inner shell the pole contributes nothing.
    let at_pole = sys.drift(0.0, sys.attractor());
    assert!(at_pole.iter().all(|x| x.is_finite()));
}

#[test]
fn attraction_repulsion_far_field_matches_the_inverse_square_law() {
    let sys = attraction_repulsion();
    let x = v(&[0.0, -1.5]);
    let term = |pole: &Vector| {
        let y = pole - &x;
        &y / y.norm().powi(3)
    };
    let want = term(sys.attractor()) - term(sys.repeller());
    assert!((sys.drift(0.0, &x) - want).amax() < 1e-15);
}

#[test]
fn dubins_with_zero_turn_rate_drives_straight() {
    let sys = Dubins::new(2.0, 0.0, Matrix::identity(3, 3)).unwrap();
    let grid = TimeGrid::new(0.0, 1.5, 30).unwrap();
    let theta = 0.7f64;
    let xs = rk4_integrate(&grid, v(&[0.0, 0.0, theta]), |t, x| Ok(sys.drift(t, x))).unwrap();
    let end = xs.last().unwrap();
    assert!((end - v(&[3.0 * theta.cos(), 3.0 * theta.sin(), theta])).amax() < 1e-12);
}

#[test]
fn quaternion_norm_is_preserved_by_the_attitude_flow() {
    let control = ControlSignal::from_flat(0.0, 1.0, 3, &[0.05, -0.03, 0.02, -0.05, 0.01, 0.0, 0.0, 0.0, 0.0]).unwrap();
    let sys = SpacecraftFull::benchmark(control);
    let grid = TimeGrid::new(0.0, 3.0, 300).unwrap();
    let q = v(&[0.9, 0.1, -0.3, 0.2]).normalize();
    let mut x0 = Vector::zeros(7);
    x0.rows_mut(0, 4).copy_from(&q);
    x0.rows_mut(4, 3).copy_from(&v(&[0.05, -0.02, 0.04]));
    let xs = rk4_integrate(&grid, x0, |t, x| Ok(sys.drift(t, x))).unwrap();
    for x in xs {
        assert!((x.rows(0, 4).norm() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn omega_subsystem_matches_the_full_model() {
    let control = ControlSignal::from_flat(0.0, 1.0, 3, &[0.02, 0.0, -0.01, 0.04, 0.03, 0.0]).unwrap();
    let omega = SpacecraftOmega::benchmark(control.clone());
    let full = SpacecraftFull::benchmark(control);
    let w = v(&[0.03, -0.01, 0.02]);
    let mut x = Vector::zeros(7);
    x[0] = 1.0;
    x.rows_mut(4, 3).copy_from(&w);
    for t in [0.0, 0.4, 1.3] {
        let f_full = full.drift(t, &x);
        assert!((f_full.rows(4, 3) - omega.drift(t, &w)).amax() < 1e-15);
        assert!((full.input_matrix(t, &x).rows(4, 3) - omega.input_matrix(t, &w)).amax() < 1e-15);
    }
}

#[test]
fn control_signal_interpolates_linearly_between_nodes() {
    let u = ControlSignal::from_flat(1.0, 0.5, 1, &[0.0, 1.0, -1.0]).unwrap();
    assert_eq!(u.value(1.0)[0], 0.0);
    assert!((u.value(1.25)[0] - 0.5).abs() < 1e-15);
    assert!((u.value(1.75)[0] - 0.0).abs() < 1e-15);
    assert_eq!(u.value(2.0)[0], -1.0);
    assert_eq!(u.value(5.0)[0], -1.0);
    assert_eq!(u.end(), 2.5);
}

#[test]
fn policy_text_round_trips() {
    let policy = MlpPolicy::shipped();
    let text = policy.to_text();
    let back = MlpPolicy::from_text(&text).unwrap();
    for x in [v(&[2.75, 0.0]), v(&[-1.0, 0.4])] {
        assert_eq!(policy.evaluate(&x), back.evaluate(&x));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("policy.txt");
    policy.save(&path).unwrap();
    assert_eq!(MlpPolicy::load(&path).unwrap().to_text(), text);
}

#[test]
fn shipped_policy_is_the_regenerated_one() {
    let shipped = MlpPolicy::shipped();
    let fitted = MlpPolicy::benchmark_fit().unwrap();
    for x in [v(&[2.75, 0.0]), v(&[0.0, 0.0]), v(&[1.0, -0.5])] {
        assert!((shipped.evaluate(&x) - fitted.evaluate(&x)).amax() < 1e-12);
    }
}

#[test]
fn neural_loop_stabilizes_its_double_integrator() {
    let sys = NeuralLoop::shipped();
    let grid = TimeGrid::new(0.0, 4.0, 160).unwrap();
    let xs = rk4_integrate(&grid, v(&[2.75, 0.0]), |t, x| Ok(sys.drift(t, x))).unwrap();
    assert!(xs.last().unwrap().norm() < xs[0].norm());
}

#[test]
fn malformed_policies_are_rejected() {
    assert!(MlpPolicy::from_text("not a policy").is_err());
    assert!(MlpPolicy::from_text("").is_err());
}
