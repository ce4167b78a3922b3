//! Smooth convex sets, sphere sampling, convex hulls and Hausdorff distances.

mod hull;
mod sets;
mod sphere;

pub use hull::{convex_hull_2d, distance_to_hull, hausdorff, HullVertices, DEFAULT_HULL_TOL};
pub use sets::{lift_set, sample_unit_ball, LambdaMode, SmoothConvexSet, BOUNDARY_TOL};
pub use sphere::{
    covering_radius, sample_sphere, sample_sphere_random, SphereScheme, DEFAULT_COVERING_PROBES,
};

pub(crate) use sets::sample_gaussian;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Inputs farther than this from unit norm are rejected.
pub const DIRECTION_TOL: f64 = 1e-9;

/// A point of the unit sphere `S^{n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction(Vector);

impl Direction {
    /// Accepts vectors within [`DIRECTION_TOL`] of unit norm and
    /// renormalizes them.
    pub fn new(v: Vector) -> Result<Self> {
        let norm = v.norm();
        let err = (norm - 1.0).abs();
        if !(err <= DIRECTION_TOL) {
            return Err(Error::InvalidDirection(err));
        }
        Ok(Direction(v / norm))
    }

    /// Normalizes any nonzero finite vector.
    pub fn normalize(v: Vector) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidDirection(f64::INFINITY));
        }
        Ok(Direction(v / norm))
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }

    pub fn into_vector(self) -> Vector {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl std::ops::Neg for &Direction {
    type Output = Direction;
    fn neg(self) -> Direction {
        Direction(-&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn direction_rejects_non_unit() {
        assert!(matches!(Direction::new(dvector![1.0, 1.0]), Err(Error::InvalidDirection(_))));
        let d = Direction::new(dvector![1.0 + 1e-10, 0.0]).unwrap();
        assert!((d.as_vector().norm() - 1.0).abs() <= 1e-12);
        assert!(Direction::normalize(dvector![0.0, 0.0]).is_err());
    }
}
