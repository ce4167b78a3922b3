//! Box-shaped sets through λ-norm balls: hulls of the inner and outer
//! relaxations sandwich the true hull and close in as λ grows.
//!
//! Run with `cargo run --release --example dubins_rectangular`.

use chreach::geometry::{distance_to_hull, hausdorff, sample_sphere, LambdaMode, Matrix, SphereScheme, Vector, DEFAULT_HULL_TOL};
use chreach::reach::TimeGrid;
use chreach::relax::{estimate_hulls_rect, RectSpec};
use chreach::systems::Dubins;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = Dubins::new(0.5, 0.5, Matrix::identity(3, 3))?;
    let spec = RectSpec::new(
        Vector::from_element(3, 1e-2),
        Vector::zeros(3),
        Vector::from_vec(vec![1e-3f64.sqrt(), 1e-3f64.sqrt(), 1e-2]),
    )?;
    let grid = TimeGrid::new(0.0, 6.0, 120)?;
    let dirs = sample_sphere(3, 300, SphereScheme::Fibonacci)?;
    for lambda in [4.0, 8.0, 16.0] {
        let under = estimate_hulls_rect(&sys, &spec, lambda, LambdaMode::Under, &dirs, &grid)?;
        let over = estimate_hulls_rect(&sys, &spec, lambda, LambdaMode::Over, &dirs, &grid)?;
        let outside = under
            .last()
            .points()
            .iter()
            .map(|p| distance_to_hull(p, over.last(), 1e-12))
            .fold(0.0, f64::max);
        println!(
            "lambda {lambda:>4}: dH(under, over) at T = {:.4e}, worst under vertex outside over = {outside:.1e}",
            hausdorff(under.last(), over.last(), DEFAULT_HULL_TOL)
        );
    }
    Ok(())
}
