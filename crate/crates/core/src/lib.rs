//! Convex hulls of reachable sets from extremal trajectories.
//!
//! For a smooth convex initial set and disturbance set, the support point of
//! the reachable set in direction `d` lies on a trajectory that starts on the
//! boundary of the initial set and solves an augmented state–costate ODE.
//! [`reach::estimate_hulls`] samples directions, integrates these extremals
//! and returns their hulls; [`reach::error_bounds`] turns Lipschitz and
//! curvature estimates into an outer padding. [`relax`] handles boxes and
//! rank-deficient inputs, [`baselines`] provides the sampling and tube
//! comparisons, and [`mpc`] uses the padded hulls to tighten the constraints
//! of a robust spacecraft MPC.

pub mod error;
pub mod experiment;
pub mod baselines;
pub mod geometry;
pub mod mpc;
pub mod reach;
pub mod relax;
pub mod rng;
pub mod systems;

pub use error::{Error, Result};
