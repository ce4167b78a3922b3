//! A Dubins car disturbed in two of three directions. Adding `ε·g₃` makes
//! the disturbance matrix invertible; the ε-hulls contain the original
//! reachable set and converge linearly as ε shrinks.
//!
//! Run with `cargo run --release --example dubins_lifted`.

use chreach::baselines::{check_containment, monte_carlo_rollouts};
use chreach::geometry::{hausdorff, sample_sphere, Matrix, SmoothConvexSet, SphereScheme, Vector, DEFAULT_HULL_TOL};
use chreach::reach::{InitialSet, TimeGrid};
use chreach::relax::{complete_basis, estimate_hulls_fullrank_relax, EpsExtension};
use chreach::systems::Dubins;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let base = Dubins::new(0.5, 0.5, g.clone())?;
    let wset = SmoothConvexSet::ball(Vector::zeros(2), 1e-2)?;
    let x0 = InitialSet::Ovaloid(SmoothConvexSet::ellipsoid(
        Vector::zeros(3),
        Matrix::from_diagonal(&Vector::from_vec(vec![1e-3, 1e-3, 1e-4])),
    )?);
    let grid = TimeGrid::new(0.0, 6.0, 120)?;
    let dirs = sample_sphere(3, 300, SphereScheme::Fibonacci)?;
    let extra = complete_basis(&g, 0)?;
    println!("extra column: {:?}", extra.column(0).as_slice());

    let rollouts = monte_carlo_rollouts(&base, &wset, &x0, 500, 3, &grid)?;
    let mut previous = None;
    for eps in [0.2, 0.1, 0.05] {
        let ext = EpsExtension::new(base.clone(), extra.clone(), eps)?;
        let est = estimate_hulls_fullrank_relax(&ext, &wset, &x0, &dirs, &grid)?;
        let report = check_containment(&est, &rollouts, 3e-3)?;
        let step = previous.as_ref().map(|p| hausdorff(p, est.last(), DEFAULT_HULL_TOL));
        println!(
            "eps {eps:<5}: {} of {} sampled states outside, dH to previous eps = {}",
            report.violations,
            report.checked,
            step.map_or("-".to_string(), |d| format!("{d:.4}"))
        );
        previous = Some(est.last().clone());
    }
    Ok(())
}
