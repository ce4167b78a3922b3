//! Gauss-map round trips `n_X(n_X⁻¹(d)) = d` on every supported set shape.
//!
//! Run with `cargo run --release --example gauss_maps`.

use chreach::geometry::{lift_set, sample_sphere_random, LambdaMode, Matrix, SmoothConvexSet, Vector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let center = Vector::from_vec(vec![0.3, -0.2, 0.1]);
    let half = Vector::from_vec(vec![1.0, 0.5, 2.0]);
    let shape = Matrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 0.5]);
    let sets = [
        ("ball", SmoothConvexSet::ball(center.clone(), 0.7)?),
        ("ellipsoid", SmoothConvexSet::ellipsoid(center.clone(), shape)?),
        ("lambda-ball under", SmoothConvexSet::lambda_ball(center.clone(), half.clone(), 8.0, LambdaMode::Under)?),
        ("lambda-ball over", SmoothConvexSet::lambda_ball(center, half, 8.0, LambdaMode::Over)?),
        ("lifted disk", lift_set(&SmoothConvexSet::ball(Vector::zeros(2), 1e-2)?, 3)?),
    ];
    let mut rng = chreach::rng::seeded(7);
    for (name, set) in &sets {
        let mut worst = 0.0f64;
        for d in sample_sphere_random(3, 1000, &mut rng) {
            let x = set.inverse_gauss_map(&d)?;
            worst = worst.max((set.gauss_map(&x)?.as_vector() - d.as_vector()).norm());
        }
        println!("{name:>18}: max round-trip error {worst:.2e}");
    }
    Ok(())
}
