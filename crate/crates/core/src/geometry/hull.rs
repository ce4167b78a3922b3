//! Convex hulls of finite point clouds.
//!
//! In the plane hulls are reduced to their counter-clockwise vertex polygon
//! (Andrew's monotone chain). In higher dimensions the raw cloud is kept and
//! every query goes through [`distance_to_hull`], which solves the
//! minimum-norm-point problem over the cloud with Wolfe's algorithm.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::Vector;
use crate::error::{Error, Result};

/// Default accuracy of hull distances.
pub const DEFAULT_HULL_TOL: f64 = 1e-9;

const MAX_WOLFE_ITERATIONS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct HullVertices {
    points: Vec<Vector>,
    ordered: bool,
}

impl HullVertices {
    /// 2-D clouds are reduced to their CCW hull polygon; other dimensions
    /// keep the cloud as given.
    pub fn from_points(points: Vec<Vector>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::Config("hull of an empty point set".into()))?;
        let n = first.len();
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::Config("hull points have mixed dimensions".into()));
        }
        if n == 2 {
            convex_hull_2d(&points)
        } else {
            Ok(HullVertices {
                points,
                ordered: false,
            })
        }
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vector> {
        self.points
    }

    /// True when the points are a CCW convex polygon.
    pub fn is_ordered(&self) -> bool {
        self.ordered
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest `dᵀv` over the vertices.
    pub fn support_value(&self, d: &Vector) -> f64 {
        self.points.iter().map(|p| p.dot(d)).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn cross(o: &Vector, a: &Vector, b: &Vector) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull polygon; interior and collinear points dropped.
pub fn convex_hull_2d(points: &[Vector]) -> Result<HullVertices> {
    if points.is_empty() {
        return Err(Error::Config("hull of an empty point set".into()));
    }
    if points.iter().any(|p| p.len() != 2) {
        return Err(Error::Unsupported(
            "convex_hull_2d needs 2-D points; higher dimensions keep the raw cloud".into(),
        ));
    }
    let mut pts: Vec<Vector> = points.to_vec();
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .unwrap_or(Ordering::Equal)
            .then(a[1].partial_cmp(&b[1]).unwrap_or(Ordering::Equal))
    });
    pts.dedup();
    if pts.len() < 3 {
        return Ok(HullVertices {
            points: pts,
            ordered: true,
        });
    }
    let mut lower: Vec<Vector> = Vec::with_capacity(pts.len());
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vector> = Vec::with_capacity(pts.len());
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Ok(HullVertices {
        points: lower,
        ordered: true,
    })
}

fn segment_distance(x: &Vector, a: &Vector, b: &Vector) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (x - a).norm();
    }
    let t = ((x - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (x - (a + ab * t)).norm()
}

fn polygon_distance(x: &Vector, poly: &[Vector]) -> f64 {
    match poly.len() {
        1 => (x - &poly[0]).norm(),
        2 => segment_distance(x, &poly[0], &poly[1]),
        k => {
            let inside = (0..k).all(|i| cross(&poly[i], &poly[(i + 1) % k], x) >= 0.0);
            if inside {
                return 0.0;
            }
            (0..k)
                .map(|i| segment_distance(x, &poly[i], &poly[(i + 1) % k]))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Euclidean distance from `x` to the convex hull of the vertices, accurate
/// to `tol`. Distances at or below `tol` are reported as 0.
pub fn distance_to_hull(x: &Vector, hull: &HullVertices, tol: f64) -> f64 {
    let d = if hull.ordered && x.len() == 2 {
        polygon_distance(x, &hull.points)
    } else {
        min_norm_point(x, &hull.points, tol)
    };
    if d <= tol {
        0.0
    } else {
        d
    }
}

/// Weights of the minimum-norm point of the affine hull of `pts`.
fn affine_minimizer(pts: &[&Vector]) -> Vec<f64> {
    let k = pts.len();
    if k == 1 {
        return vec![1.0];
    }
    let n = pts[0].len();
    let base = pts[0];
    let b = DMatrix::from_fn(n, k - 1, |r, c| pts[c + 1][r] - base[r]);
    let svd = b.svd(true, true);
    let alpha = svd
        .solve(&(-base), 1e-13 * svd.singular_values.max().max(1e-300))
        .unwrap_or_else(|_| DVector::zeros(k - 1));
    let mut mu = Vec::with_capacity(k);
    mu.push(1.0 - alpha.sum());
    mu.extend(alpha.iter().copied());
    mu
}

/// Wolfe's minimum-norm-point algorithm on `{v_i - x}`.
fn min_norm_point(x: &Vector, vertices: &[Vector], tol: f64) -> f64 {
    let pts: Vec<Vector> = vertices.iter().map(|v| v - x).collect();
    let start = pts
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.norm_squared().partial_cmp(&b.1.norm_squared()).unwrap_or(Ordering::Equal))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut support: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut current = pts[start].clone();
    let mut previous = f64::INFINITY;

    for _ in 0..MAX_WOLFE_ITERATIONS {
        let norm2 = current.norm_squared();
        // Major cycles strictly decrease the norm; a stall is round-off.
        if norm2 <= tol * tol || norm2 >= previous {
            return norm2.sqrt();
        }
        previous = norm2;
        let (j, best) = pts
            .iter()
            .enumerate()
            .map(|(i, p)| (i, current.dot(p)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
            .expect("nonempty cloud");
        let norm = norm2.sqrt();
        // ‖x‖ - (xᵀp_j)/‖x‖ bounds the gap to the true distance.
        if (norm2 - best) / norm <= tol || support.contains(&j) {
            return norm;
        }
        support.push(j);
        weights.push(0.0);

        loop {
            let refs: Vec<&Vector> = support.iter().map(|&i| &pts[i]).collect();
            let mu = affine_minimizer(&refs);
            if mu.iter().all(|&m| m > 1e-14) {
                weights = mu;
                break;
            }
            let mut theta = 1.0f64;
            for (l, m) in weights.iter().zip(mu.iter()) {
                if *m <= 1e-14 && l - m > 0.0 {
                    theta = theta.min(l / (l - m));
                }
            }
            for (l, m) in weights.iter_mut().zip(mu.iter()) {
                *l += theta * (m - *l);
            }
            let mut keep_s = Vec::with_capacity(support.len());
            let mut keep_w = Vec::with_capacity(support.len());
            let drop = weights
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(Ordering::Equal))
                .map(|(i, _)| i)
                .unwrap_or(0);
            for (i, (&s, &w)) in support.iter().zip(weights.iter()).enumerate() {
                if i != drop && w > 1e-14 {
                    keep_s.push(s);
                    keep_w.push(w);
                }
            }
            if keep_s.is_empty() {
                keep_s.push(support[drop]);
                keep_w.push(1.0);
            }
            let total: f64 = keep_w.iter().sum();
            keep_w.iter_mut().for_each(|w| *w /= total);
            support = keep_s;
            weights = keep_w;
            if support.len() == 1 {
                break;
            }
        }
        current = support
            .iter()
            .zip(weights.iter())
            .fold(DVector::zeros(x.len()), |acc, (&i, &w)| acc + &pts[i] * w);
    }
    current.norm()
}

/// Hausdorff distance between the convex hulls of two vertex clouds.
pub fn hausdorff(a: &HullVertices, b: &HullVertices, tol: f64) -> f64 {
    let directed = |from: &HullVertices, to: &HullVertices| {
        from.points
            .par_iter()
            .map(|p| distance_to_hull(p, to, tol))
            .reduce(|| 0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn square(side: f64) -> HullVertices {
        HullVertices::from_points(vec![
            dvector![0.0, 0.0],
            dvector![side, 0.0],
            dvector![side, side],
            dvector![0.0, side],
        ])
        .unwrap()
    }

    #[test]
    fn square_with_interior_point() {
        let h = convex_hull_2d(&[
            dvector![0.0, 0.0],
            dvector![1.0, 0.0],
            dvector![1.0, 1.0],
            dvector![0.0, 1.0],
            dvector![0.5, 0.5],
            dvector![0.5, 0.0],
        ])
        .unwrap();
        assert_eq!(h.len(), 4);
        assert!(h.is_ordered());
        let p = h.points();
        for i in 0..p.len() {
            assert!(cross(&p[i], &p[(i + 1) % p.len()], &p[(i + 2) % p.len()]) >= -1e-12);
        }
    }

    #[test]
    fn single_point_and_wrong_dimension() {
        let h = convex_hull_2d(&[dvector![3.0, 4.0]]).unwrap();
        assert_eq!(h.points(), &[dvector![3.0, 4.0]]);
        assert!(matches!(convex_hull_2d(&[dvector![1.0, 2.0, 3.0]]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn distances_to_square() {
        let sq = square(1.0);
        assert!((distance_to_hull(&dvector![2.0, 0.0], &sq, 1e-12) - 1.0).abs() < 1e-15);
        assert_eq!(distance_to_hull(&dvector![0.3, 0.6], &sq, 1e-12), 0.0);
        // Same answers through the dimension-agnostic route.
        let raw = HullVertices {
            points: sq.points().to_vec(),
            ordered: false,
        };
        assert!((distance_to_hull(&dvector![2.0, 0.0], &raw, 1e-12) - 1.0).abs() < 1e-10);
        assert!((distance_to_hull(&dvector![2.0, 3.0], &raw, 1e-12) - 5f64.sqrt()).abs() < 1e-10);
        assert_eq!(distance_to_hull(&dvector![0.3, 0.6], &raw, 1e-9), 0.0);
    }

    #[test]
    fn hausdorff_nested_squares() {
        let d = hausdorff(&square(1.0), &square(2.0), 1e-12);
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(hausdorff(&square(1.0), &square(1.0), 1e-12), 0.0);
    }

    #[test]
    fn wolfe_cube_queries() {
        let cube: Vec<Vector> = (0..8)
            .map(|c| DVector::from_iterator(3, (0..3).map(|i| ((c >> i) & 1) as f64)))
            .collect();
        let h = HullVertices::from_points(cube).unwrap();
        assert!(!h.is_ordered());
        assert_eq!(distance_to_hull(&dvector![0.5, 0.5, 0.5], &h, 1e-12), 0.0);
        assert!((distance_to_hull(&dvector![0.5, 0.5, 2.0], &h, 1e-12) - 1.0).abs() < 1e-10);
        assert!((distance_to_hull(&dvector![2.0, 2.0, 2.0], &h, 1e-12) - 3f64.sqrt()).abs() < 1e-10);
        assert!((distance_to_hull(&dvector![0.5, -1.0, 2.0], &h, 1e-12) - 2f64.sqrt()).abs() < 1e-10);
    }
}
