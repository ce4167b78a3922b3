//! Convex hulls of reachable sets from extremal state–costate trajectories.
//!
//! For every initial direction `d0 ∈ S^{n−1}` the augmented ODE
//!
//! ```text
//! ẋ = f(t,x) + g(t,x)w,         x(0) = x0            (singleton X0)
//!                                x(0) = n_{X0}⁻¹(−d0)  (ovaloid X0)
//! ṗ = −(∇f(t,x) + ∇g(t,x)w)ᵀp,  p(0) = d0
//! w = n_W⁻¹(−g(t,x)ᵀp / ‖g(t,x)ᵀp‖)
//! ```
//!
//! is integrated with fixed-step RK4. The states `x_{d0}(t)` lie on the
//! boundary of the reachable set and the convex hull of a direction fan
//! approximates its convex hull at every grid node at once.

mod bounds;
mod hulls;
mod ode;

pub use bounds::{error_bounds, lipschitz_estimates, ErrorBounds, LipschitzEstimates, DEFAULT_LIPSCHITZ_PROBES, TANGENT_STEP};
pub use hulls::{estimate_hulls, extremal_fan, HullEstimate, Provenance};
pub use ode::{
    augmented_rhs, extremal_trajectory, initial_pair, integrate_costate, replay_disturbances, rk4_integrate,
    ExtremalTrajectory, COSTATE_MAX, COSTATE_MIN, SINGULAR_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{SmoothConvexSet, Vector};

/// Default number of RK4 steps per horizon.
pub const DEFAULT_STEPS: usize = 200;

/// Uniform grid `t_k = t0 + k·h`, `h = (tf − t0)/steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub tf: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, tf: f64, steps: usize) -> Result<Self> {
        let g = TimeGrid { t0, tf, steps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tf > self.t0) || !self.t0.is_finite() || !self.tf.is_finite() || self.steps == 0 {
            return Err(Error::Config(format!(
                "time grid needs tf > t0 and steps >= 1 (t0 = {}, tf = {}, steps = {})",
                self.t0, self.tf, self.steps
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.tf - self.t0) / self.steps as f64
    }

    pub fn nodes(&self) -> usize {
        self.steps + 1
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.tf
        } else {
            self.t0 + k as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nodes()).map(|k| self.time(k)).collect()
    }
}

/// `X0` is either a point or a strictly convex body with smooth boundary.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialSet {
    Singleton(Vector),
    Ovaloid(SmoothConvexSet),
}

impl InitialSet {
    pub fn dim(&self) -> usize {
        match self {
            InitialSet::Singleton(x) => x.len(),
            InitialSet::Ovaloid(s) => s.dim(),
        }
    }

    pub fn center(&self) -> Vector {
        match self {
            InitialSet::Singleton(x) => x.clone(),
            InitialSet::Ovaloid(s) => s.center(),
        }
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        match self {
            InitialSet::Singleton(x) => x.clone(),
            InitialSet::Ovaloid(s) => s.sample_uniform(rng),
        }
    }
}
