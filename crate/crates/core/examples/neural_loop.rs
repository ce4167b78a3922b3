//! Reachability of a double integrator closed by a softplus network:
//! Extremal hulls against RandUP at the same budget of 100.
//!
//! Run with `cargo run --release --example neural_loop`.

use chreach::baselines::{randup_hulls, DiscreteSystem, DisturbanceMode};
use chreach::geometry::{hausdorff, sample_sphere, Matrix, SmoothConvexSet, SphereScheme, Vector, DEFAULT_HULL_TOL};
use chreach::reach::{estimate_hulls, InitialSet, TimeGrid};
use chreach::systems::NeuralLoop;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = NeuralLoop::shipped();
    let wset = SmoothConvexSet::ball(Vector::zeros(2), 2f64.sqrt() / 20.0)?;
    let x0 = InitialSet::Ovaloid(SmoothConvexSet::ellipsoid(
        Vector::from_vec(vec![2.75, 0.0]),
        Matrix::from_diagonal(&Vector::from_vec(vec![2.0 * 0.25f64.powi(2), 2.0 * 0.1f64.powi(2)])),
    )?);
    let grid = TimeGrid::new(0.0, 4.0, 80)?;

    let alg = estimate_hulls(&sys, &wset, &x0, &sample_sphere(2, 100, SphereScheme::UniformAngle)?, &grid)?;
    let truth = estimate_hulls(&sys, &wset, &x0, &sample_sphere(2, 4096, SphereScheme::UniformAngle)?, &grid)?;
    let dsys = DiscreteSystem::new(&sys, 0.0, 0.25, 16, 5, DisturbanceMode::Held)?;
    let randup = randup_hulls(&dsys, &wset, &x0, 100, 4)?;

    let d_alg = hausdorff(alg.last(), truth.last(), DEFAULT_HULL_TOL);
    let d_randup = hausdorff(randup.last(), truth.last(), DEFAULT_HULL_TOL);
    println!("dH to ground truth at T: extremal hulls {d_alg:.3e}, RandUP {d_randup:.3e} ({:.0}x)", d_randup / d_alg);
    Ok(())
}
