//! Hull estimates with error bounds on the attraction–repulsion system, and a
//! Monte Carlo check that every sampled trajectory stays inside the padded
//! hulls.
//!
//! Run with `cargo run --release --example attraction_repulsion`.

use chreach::baselines::{check_containment, monte_carlo_rollouts};
use chreach::geometry::{covering_radius, sample_sphere, SmoothConvexSet, SphereScheme, Vector};
use chreach::reach::{error_bounds, estimate_hulls, lipschitz_estimates, InitialSet, TimeGrid};
use chreach::systems::AttractionRepulsion;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = AttractionRepulsion::new(Vector::from_vec(vec![1.0, 0.0]), Vector::from_vec(vec![-1.0, 0.0]), 0.2)?;
    let wset = SmoothConvexSet::ball(Vector::zeros(2), 0.1)?;
    let x0 = InitialSet::Singleton(Vector::from_vec(vec![0.0, -1.5]));
    let grid = TimeGrid::new(0.0, 2.0, 200)?;
    let dirs = sample_sphere(2, 128, SphereScheme::UniformAngle)?;

    let est = estimate_hulls(&sys, &wset, &x0, &dirs, &grid)?;
    let lip = lipschitz_estimates(&sys, &wset, &x0, &grid, 500, 1)?;
    let delta = covering_radius(&dirs, 100_000, 1)?;
    let bounds = error_bounds(&lip.lbar, &lip.hbar, delta);
    for k in [50, 100, 200] {
        println!(
            "t = {:.1}: {} vertices, L = {:.3}, H = {:.3}, eps naive {:.2e}, eps quadratic {:.2e}",
            grid.time(k),
            est.hulls[k].len(),
            lip.lbar[k],
            lip.hbar[k],
            bounds.naive[k],
            bounds.quadratic[k]
        );
    }

    let padded = est.with_padding(bounds.quadratic)?;
    let rollouts = monte_carlo_rollouts(&sys, &wset, &x0, 2000, 2, &grid)?;
    let report = check_containment(&padded, &rollouts, 3e-3)?;
    println!(
        "{} sampled states, {} outside the padded hulls (max excess {:.2e})",
        report.checked, report.violations, report.max_excess
    );
    Ok(())
}
