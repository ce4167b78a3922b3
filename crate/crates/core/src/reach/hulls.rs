use rayon::prelude::*;

use super::{extremal_trajectory, ExtremalTrajectory, InitialSet, TimeGrid};
use crate::error::{Error, Result};
use crate::geometry::{distance_to_hull, Direction, HullVertices, SmoothConvexSet, Vector};
use crate::systems::System;

/// Where the directions of an estimate came from.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Provenance {
    pub directions: usize,
    pub scheme: String,
    pub seed: Option<u64>,
}

/// Per-node hulls of a direction fan plus a padding `ε_t` per node.
///
/// The hulls are inner estimates; the padded sets `{x : d(x, hull_k) ≤ ε_k}`
/// are the outer estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct HullEstimate {
    pub grid: TimeGrid,
    pub hulls: Vec<HullVertices>,
    pub padding: Vec<f64>,
    pub provenance: Provenance,
}

impl HullEstimate {
    /// Hulls of per-node point sets with zero padding.
    pub fn from_node_points(grid: TimeGrid, points: Vec<Vec<Vector>>, provenance: Provenance) -> Result<Self> {
        if points.len() != grid.nodes() {
            return Err(Error::Config(format!(
                "{} point sets for {} grid nodes",
                points.len(),
                grid.nodes()
            )));
        }
        let hulls = points
            .into_par_iter()
            .map(HullVertices::from_points)
            .collect::<Result<Vec<_>>>()?;
        Ok(HullEstimate {
            grid,
            padding: vec![0.0; hulls.len()],
            hulls,
            provenance,
        })
    }

    pub fn with_padding(mut self, padding: Vec<f64>) -> Result<Self> {
        if padding.len() != self.hulls.len() || padding.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::Config("padding needs one finite nonnegative value per node".into()));
        }
        self.padding = padding;
        Ok(self)
    }

    pub fn last(&self) -> &HullVertices {
        &self.hulls[self.hulls.len() - 1]
    }

    /// Membership of `x` in the padded hull at node `k`, up to `slack`.
    pub fn outer_contains(&self, k: usize, x: &Vector, slack: f64) -> bool {
        distance_to_hull(x, &self.hulls[k], 1e-9) <= self.padding[k] + slack
    }
}

/// Extremal trajectories for every direction, integrated concurrently and
/// returned in direction order.
pub fn extremal_fan(
    sys: &dyn System,
    wset: &SmoothConvexSet,
    x0: &InitialSet,
    dirs: &[Direction],
    grid: &TimeGrid,
) -> Result<Vec<ExtremalTrajectory>> {
    if dirs.is_empty() {
        return Err(Error::Config("no initial directions".into()));
    }
    let results: Vec<Result<ExtremalTrajectory>> = dirs
        .par_iter()
        .map(|d| extremal_trajectory(sys, wset, x0, d, grid))
        .collect();
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Direction {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Per-node convex hulls of the extremal states of a direction fan.
pub fn estimate_hulls(
    sys: &dyn System,
    wset: &SmoothConvexSet,
    x0: &InitialSet,
    dirs: &[Direction],
    grid: &TimeGrid,
) -> Result<HullEstimate> {
    let fan = extremal_fan(sys, wset, x0, dirs, grid)?;
    let points = (0..grid.nodes())
        .map(|k| fan.iter().map(|tr| tr.x[k].clone()).collect())
        .collect();
    HullEstimate::from_node_points(
        *grid,
        points,
        Provenance {
            directions: dirs.len(),
            scheme: "explicit".into(),
            seed: None,
        },
    )
}
