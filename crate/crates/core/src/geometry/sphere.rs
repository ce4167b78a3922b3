use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;

use super::{sample_gaussian, Direction, Vector};
use crate::error::{Error, Result};

/// Default number of probe directions for [`covering_radius`].
pub const DEFAULT_COVERING_PROBES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SphereScheme {
    /// Angles `2πi/M` on the circle (`n = 2` only).
    UniformAngle,
    /// Fibonacci lattice on `S²` (`n = 3` only).
    Fibonacci,
    /// Normalized Gaussian samples, any `n ≥ 2`.
    Random { seed: u64 },
}

impl SphereScheme {
    pub fn label(&self) -> String {
        match self {
            SphereScheme::UniformAngle => "uniform-angle".into(),
            SphereScheme::Fibonacci => "fibonacci".into(),
            SphereScheme::Random { seed } => format!("random({seed})"),
        }
    }
}

pub fn sample_sphere(n: usize, count: usize, scheme: SphereScheme) -> Result<Vec<Direction>> {
    if n < 2 || count == 0 {
        return Err(Error::Config(format!(
            "sphere sampling needs n >= 2 and M >= 1 (got n = {n}, M = {count})"
        )));
    }
    match scheme {
        SphereScheme::UniformAngle => {
            if n != 2 {
                return Err(Error::Config("uniform-angle sampling requires n = 2".into()));
            }
            Ok((0..count)
                .map(|i| {
                    let a = 2.0 * PI * i as f64 / count as f64;
                    Direction(DVector::from_vec(vec![a.cos(), a.sin()]))
                })
                .collect())
        }
        SphereScheme::Fibonacci => {
            if n != 3 {
                return Err(Error::Config("Fibonacci lattice sampling requires n = 3".into()));
            }
            Ok(fibonacci_lattice(count))
        }
        SphereScheme::Random { seed } => {
            let mut rng = crate::rng::seeded(seed);
            Ok(sample_sphere_random(n, count, &mut rng))
        }
    }
}

pub fn sample_sphere_random<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Vec<Direction> {
    (0..count)
        .map(|_| {
            let g = sample_gaussian(n, rng);
            let norm = g.norm();
            Direction(g / norm)
        })
        .collect()
}

fn fibonacci_lattice(count: usize) -> Vec<Direction> {
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            let v = DVector::from_vec(vec![r * phi.cos(), r * phi.sin(), z]);
            let norm = v.norm();
            Direction(v / norm)
        })
        .collect()
}

/// Probe directions for covering estimates: a golden-ratio sequence of
/// angles for `n = 2`, a randomly rotated Fibonacci lattice for `n = 3`,
/// seeded Gaussian samples otherwise.
fn probe_directions(n: usize, probes: usize, seed: u64) -> Vec<Vector> {
    let mut rng = crate::rng::seeded(seed);
    match n {
        2 => {
            let phase: f64 = rng.random();
            let step = (5f64.sqrt() - 1.0) / 2.0;
            (0..probes)
                .map(|i| {
                    let a = 2.0 * PI * (phase + step * i as f64).fract();
                    DVector::from_vec(vec![a.cos(), a.sin()])
                })
                .collect()
        }
        3 => {
            let rot = random_rotation3(&mut rng);
            fibonacci_lattice(probes)
                .into_iter()
                .map(|d| &rot * d.into_vector())
                .collect()
        }
        _ => sample_sphere_random(n, probes, &mut rng)
            .into_iter()
            .map(Direction::into_vector)
            .collect(),
    }
}

fn random_rotation3<R: Rng + ?Sized>(rng: &mut R) -> nalgebra::DMatrix<f64> {
    let g = nalgebra::DMatrix::from_fn(3, 3, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    g.qr().q()
}

/// Largest distance from `probes` probe directions to their nearest sample:
/// an estimate (from below) of the smallest `δ` such that the samples
/// `δ`-cover the sphere.
pub fn covering_radius(dirs: &[Direction], probes: usize, seed: u64) -> Result<f64> {
    let n = dirs
        .first()
        .ok_or_else(|| Error::Config("covering radius of an empty sample".into()))?
        .dim();
    let probes = probe_directions(n, probes.max(1), seed);
    let worst = probes
        .par_iter()
        .map(|p| {
            dirs.iter()
                .map(|d| (p - d.as_vector()).norm_squared())
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst.sqrt())
}
