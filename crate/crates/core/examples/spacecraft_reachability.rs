//! Angular-velocity reachability of the spacecraft under a fixed control:
//! Extremal hulls, RandUP and the ellipsoidal Lipschitz tube against a dense
//! ground truth.
//!
//! Run with `cargo run --release --example spacecraft_reachability`.

use chreach::baselines::{
    check_tube, estimate_step_hessian_bound, lipschitz_tube, monte_carlo_discrete, randup_hulls, DiscreteSystem,
    DisturbanceMode,
};
use chreach::geometry::{hausdorff, sample_sphere, SmoothConvexSet, SphereScheme, Vector, DEFAULT_HULL_TOL};
use chreach::reach::{estimate_hulls, InitialSet, TimeGrid};
use chreach::systems::{ControlSignal, SpacecraftOmega};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = SpacecraftOmega::benchmark(ControlSignal::zeros(3, 10, 1.0));
    let wset = SmoothConvexSet::ball(Vector::zeros(3), 1e-2)?;
    let w0 = Vector::from_vec(vec![0.05, -0.02, 0.03]);
    let x0 = InitialSet::Singleton(w0.clone());
    let grid = TimeGrid::new(0.0, 10.0, 100)?;

    let truth_dirs = sample_sphere(3, 4096, SphereScheme::Fibonacci)?;
    let alg = estimate_hulls(&sys, &wset, &x0, &sample_sphere(3, 100, SphereScheme::Fibonacci)?, &grid)?;
    let truth = estimate_hulls(&sys, &wset, &x0, &truth_dirs, &grid)?;
    let held = DiscreteSystem::new(&sys, 0.0, 1.0, 10, 10, DisturbanceMode::Held)?;
    let randup = randup_hulls(&held, &wset, &x0, 100, 6)?;

    let additive = DiscreteSystem::new(&sys, 0.0, 1.0, 10, 10, DisturbanceMode::Additive)?;
    let nominal = additive.nominal_rollout(&w0)?;
    let half = Vector::from_element(3, 0.05);
    let mut hbar = 0.0f64;
    for (k, x) in nominal.iter().enumerate().take(10) {
        hbar = hbar.max(estimate_step_hessian_bound(&additive, k, x, &half, 200, 1e-3, k as u64)?);
    }
    let tube = lipschitz_tube(&additive, &w0, 1e-2, hbar)?;
    let sound = check_tube(&tube, &monte_carlo_discrete(&additive, &wset, &x0, 1000, 6)?, 1e-9)?;

    let d = |h| hausdorff(h, truth.last(), DEFAULT_HULL_TOL);
    println!("dH to ground truth at T = 10:");
    println!("  extremal hulls (M = 100): {:.3e}", d(alg.last()));
    println!("  RandUP (100 samples):  {:.3e}", d(randup.last()));
    println!("  Lipschitz tube:        {:.3e}", d(&tube.boundary_hull(10, &truth_dirs)?));
    println!("tube soundness: {} of {} sampled states outside", sound.violations, sound.checked);
    Ok(())
}
