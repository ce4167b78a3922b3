use rand::Rng;
use rayon::prelude::*;

use super::{extremal_trajectory, InitialSet, TimeGrid};
use crate::error::{Error, Result};
use crate::geometry::{sample_sphere_random, Direction, Matrix, SmoothConvexSet, Vector};
use crate::systems::System;

/// Tangent step of the finite differences of `F(·, t)` on the sphere.
pub const TANGENT_STEP: f64 = 1e-5;
pub const DEFAULT_LIPSCHITZ_PROBES: usize = 1000;
/// Angle between a probe and its partner in the `H̄` estimate.
const PARTNER_ANGLE: f64 = 1e-2;

/// Sampled per-node Lipschitz constants of `F(·,t)` and `dF(·,t)`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct LipschitzEstimates {
    pub lbar: Vec<f64>,
    pub hbar: Vec<f64>,
    pub probes: usize,
}

impl LipschitzEstimates {
    /// Elementwise maximum of two estimates on the same grid.
    pub fn max(&self, other: &LipschitzEstimates) -> LipschitzEstimates {
        LipschitzEstimates {
            lbar: self.lbar.iter().zip(&other.lbar).map(|(a, b)| a.max(*b)).collect(),
            hbar: self.hbar.iter().zip(&other.hbar).map(|(a, b)| a.max(*b)).collect(),
            probes: self.probes + other.probes,
        }
    }
}

/// Orthonormal basis of the tangent space of the sphere at `d`: the last
/// `n − 1` columns of the Householder reflection sending `e₁` to `d`.
fn tangent_basis(d: &Vector) -> Vec<Vector> {
    let n = d.len();
    let mut v = d.clone();
    v[0] -= 1.0;
    let vv = v.norm_squared();
    let h = if vv < 1e-24 {
        Matrix::identity(n, n)
    } else {
        Matrix::identity(n, n) - &v * v.transpose() * (2.0 / vv)
    };
    (1..n).map(|j| h.column(j).into_owned()).collect()
}

/// `D(t) = Σ_j ∂F/∂e_j · e_jᵀ` at every node, by central differences along
/// the tangent basis.
fn ambient_derivative(
    sys: &dyn System,
    wset: &SmoothConvexSet,
    x0: &InitialSet,
    d: &Vector,
    grid: &TimeGrid,
) -> Result<Vec<Matrix>> {
    let n = d.len();
    let mut out = vec![Matrix::zeros(n, n); grid.nodes()];
    for e in tangent_basis(d) {
        let plus = Direction::normalize(d + &e * TANGENT_STEP)?;
        let minus = Direction::normalize(d - &e * TANGENT_STEP)?;
        let xp = extremal_trajectory(sys, wset, x0, &plus, grid)?.x;
        let xm = extremal_trajectory(sys, wset, x0, &minus, grid)?.x;
        for (k, m) in out.iter_mut().enumerate() {
            let col = (&xp[k] - &xm[k]) / (2.0 * TANGENT_STEP);
            *m += col * e.transpose();
        }
    }
    Ok(out)
}

fn spectral_norm(m: &Matrix) -> f64 {
    m.singular_values().max()
}

/// Sampled `L̄_t = max_j ‖∇F(d^j,t)‖` and `H̄_t`, the largest observed
/// `‖∇F(d,t) − ∇F(d',t)‖/‖d − d'‖` over probe pairs at angle `10⁻²`.
///
/// Probe `j` draws from sub-stream `j` of `seed`, so raising `probes` never
/// lowers the estimates.
pub fn lipschitz_estimates(
    sys: &dyn System,
    wset: &SmoothConvexSet,
    x0: &InitialSet,
    grid: &TimeGrid,
    probes: usize,
    seed: u64,
) -> Result<LipschitzEstimates> {
    if probes < 2 {
        return Err(Error::Config("Lipschitz estimation needs at least 2 probes".into()));
    }
    let n = sys.state_dim();
    let per_probe: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..probes)
        .into_par_iter()
        .map(|j| {
            let mut rng = crate::rng::stream(seed, j as u64);
            let d = sample_sphere_random(n, 1, &mut rng).remove(0).into_vector();
            let basis = tangent_basis(&d);
            let mut t = Vector::zeros(n);
            for b in &basis {
                t += b * rng.sample::<f64, _>(rand_distr::StandardNormal);
            }
            let t = t.normalize();
            let partner = (&d * PARTNER_ANGLE.cos() + t * PARTNER_ANGLE.sin()).normalize();
            let gap = (&d - &partner).norm();
            let da = ambient_derivative(sys, wset, x0, &d, grid)?;
            let db = ambient_derivative(sys, wset, x0, &partner, grid)?;
            let l = da
                .iter()
                .zip(db.iter())
                .map(|(a, b)| spectral_norm(a).max(spectral_norm(b)))
                .collect();
            let h = da.iter().zip(db.iter()).map(|(a, b)| spectral_norm(&(a - b)) / gap).collect();
            Ok((l, h))
        })
        .collect();
    let mut lbar = vec![0.0f64; grid.nodes()];
    let mut hbar = vec![0.0f64; grid.nodes()];
    for r in per_probe {
        let (l, h) = r?;
        for k in 0..grid.nodes() {
            lbar[k] = lbar[k].max(l[k]);
            hbar[k] = hbar[k].max(h[k]);
        }
    }
    Ok(LipschitzEstimates { lbar, hbar, probes })
}

/// Per-node paddings of a `δ`-cover: `L̄δ` and `(L̄ + H̄)δ²/2`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ErrorBounds {
    pub naive: Vec<f64>,
    pub quadratic: Vec<f64>,
}

impl ErrorBounds {
    /// The smaller of the two bounds at every node.
    pub fn tightest(&self) -> Vec<f64> {
        self.naive.iter().zip(&self.quadratic).map(|(a, b)| a.min(*b)).collect()
    }
}

pub fn error_bounds(lbar: &[f64], hbar: &[f64], delta: f64) -> ErrorBounds {
    ErrorBounds {
        naive: lbar.iter().map(|l| l * delta).collect(),
        quadratic: lbar
            .iter()
            .zip(hbar.iter())
            .map(|(l, h)| 0.5 * (l + h) * delta * delta)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn plug_in_bounds() {
        let b = error_bounds(&[1.0], &[1.0], 0.1);
        assert!((b.naive[0] - 0.1).abs() < 1e-15);
        assert!((b.quadratic[0] - 0.01).abs() < 1e-15);
        let z = error_bounds(&[2.0], &[3.0], 0.0);
        assert_eq!((z.naive[0], z.quadratic[0]), (0.0, 0.0));
    }

    #[test]
    fn tangent_basis_is_orthonormal() {
        for d in [dvector![1.0, 0.0, 0.0], dvector![0.6, 0.0, 0.8], dvector![-1.0, 0.0, 0.0]] {
            let b = tangent_basis(&d);
            for (i, u) in b.iter().enumerate() {
                assert!(u.dot(&d).abs() < 1e-14);
                for (j, v) in b.iter().enumerate() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((u.dot(v) - e).abs() < 1e-14);
                }
            }
        }
    }
}
