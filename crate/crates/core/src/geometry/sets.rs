//! Smooth convex sets with closed-form Gauss maps.
//!
//! Each variant is a compact strictly convex body whose boundary is an
//! ovaloid, so the Gauss map `n: ∂C → S^{n-1}` is a diffeomorphism and the
//! support point in direction `d` is `n^{-1}(d)`.
//!
//! | variant | level function `h` (boundary is `h = 1`) |
//! |---|---|
//! | `Ball` | `‖x - c‖² / r²` |
//! | `Ellipsoid` | `(x - c)ᵀ Q⁻¹ (x - c)` |
//! | `LambdaBall` (under) | `‖(x - c) ⊘ δ‖_λ²` |
//! | `LambdaBall` (over) | `‖(x - c) ⊘ δ‖_λ² / n^{2/λ}` |
//! | `Lifted` | `h_base(w_{1:m}) + ½‖w_{m+1:n}‖²` |

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Direction, Matrix, Vector};
use crate::error::{Error, Result};

/// Tolerance on the level-set residual for boundary membership.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// Which smooth surrogate of a box a [`SmoothConvexSet::LambdaBall`] is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaMode {
    /// `h_λ ≤ 1`, contained in the box.
    Under,
    /// `h_λ ≤ n^{2/λ}`, contains the box.
    Over,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SmoothConvexSet {
    Ball {
        center: Vector,
        radius: f64,
    },
    Ellipsoid {
        center: Vector,
        shape: Matrix,
        shape_inv: Matrix,
        /// Lower Cholesky factor of `shape`, used for sampling.
        factor: Matrix,
    },
    LambdaBall {
        center: Vector,
        half_widths: Vector,
        lambda: f64,
        mode: LambdaMode,
    },
    /// `{w ∈ R^n : h_base(w_{1:m}) + ½‖w_{m+1:n}‖² ≤ 1}` for a centered
    /// ball or ellipsoid base over `R^m`. Evaluated through the level-set
    /// formulas; [`lift_set`] returns the equivalent ellipsoid.
    Lifted {
        base: Box<SmoothConvexSet>,
        dim: usize,
    },
}

impl SmoothConvexSet {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Config(format!("ball radius must be > 0, got {radius}")));
        }
        check_finite(&center, "ball center")?;
        Ok(SmoothConvexSet::Ball { center, radius })
    }

    pub fn ellipsoid(center: Vector, shape: Matrix) -> Result<Self> {
        let n = center.len();
        if shape.nrows() != n || shape.ncols() != n {
            return Err(Error::Config(format!(
                "ellipsoid shape must be {n}x{n}, got {}x{}",
                shape.nrows(),
                shape.ncols()
            )));
        }
        check_finite(&center, "ellipsoid center")?;
        let asym = (&shape - shape.transpose()).amax();
        if asym > 1e-12 * shape.amax().max(1.0) {
            return Err(Error::Config("ellipsoid shape is not symmetric".into()));
        }
        let min_eig = shape.clone().symmetric_eigenvalues().min();
        if !(min_eig > 0.0) {
            return Err(Error::Config(format!(
                "ellipsoid shape is not positive definite (min eigenvalue {min_eig:e})"
            )));
        }
        let chol = shape
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Config("ellipsoid shape Cholesky failed".into()))?;
        let factor = chol.l();
        let shape_inv = chol.inverse();
        Ok(SmoothConvexSet::Ellipsoid {
            center,
            shape,
            shape_inv,
            factor,
        })
    }

    pub fn lambda_ball(
        center: Vector,
        half_widths: Vector,
        lambda: f64,
        mode: LambdaMode,
    ) -> Result<Self> {
        if !(lambda > 1.0) || !lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be > 1, got {lambda}")));
        }
        if center.len() != half_widths.len() {
            return Err(Error::Config("lambda-ball center/half-width length mismatch".into()));
        }
        if half_widths.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Config("lambda-ball half-widths must be > 0".into()));
        }
        check_finite(&center, "lambda-ball center")?;
        Ok(SmoothConvexSet::LambdaBall {
            center,
            half_widths,
            lambda,
            mode,
        })
    }

    /// Lifted set over `R^dim` evaluated by the level-set route.
    pub fn lifted(base: SmoothConvexSet, dim: usize) -> Result<Self> {
        check_liftable(&base, dim)?;
        Ok(SmoothConvexSet::Lifted {
            base: Box::new(base),
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            SmoothConvexSet::Ball { center, .. }
            | SmoothConvexSet::Ellipsoid { center, .. }
            | SmoothConvexSet::LambdaBall { center, .. } => center.len(),
            SmoothConvexSet::Lifted { dim, .. } => *dim,
        }
    }

    pub fn center(&self) -> Vector {
        match self {
            SmoothConvexSet::Ball { center, .. }
            | SmoothConvexSet::Ellipsoid { center, .. }
            | SmoothConvexSet::LambdaBall { center, .. } => center.clone(),
            SmoothConvexSet::Lifted { dim, .. } => DVector::zeros(*dim),
        }
    }

    /// Value of the normalized level function; the set is `{level ≤ 1}`.
    pub fn level(&self, x: &Vector) -> f64 {
        match self {
            SmoothConvexSet::Ball { center, radius } => (x - center).norm_squared() / (radius * radius),
            SmoothConvexSet::Ellipsoid {
                center, shape_inv, ..
            } => {
                let y = x - center;
                y.dot(&(shape_inv * &y))
            }
            SmoothConvexSet::LambdaBall {
                center,
                half_widths,
                lambda,
                mode,
            } => {
                let n = x.len() as f64;
                let s: f64 = x
                    .iter()
                    .zip(center.iter())
                    .zip(half_widths.iter())
                    .map(|((xi, ci), di)| ((xi - ci) / di).abs().powf(*lambda))
                    .sum();
                let h = s.powf(2.0 / lambda);
                match mode {
                    LambdaMode::Under => h,
                    LambdaMode::Over => h / n.powf(2.0 / lambda),
                }
            }
            SmoothConvexSet::Lifted { base, dim } => {
                let m = base.dim();
                let head = x.rows(0, m).into_owned();
                let tail = x.rows(m, dim - m);
                base.level(&head) + 0.5 * tail.norm_squared()
            }
        }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.level(x) <= 1.0 + tol
    }

    /// Boundary point with outward normal `d`.
    pub fn inverse_gauss_map(&self, d: &Direction) -> Result<Vector> {
        let d = d.as_vector();
        if d.len() != self.dim() {
            return Err(Error::Config(format!(
                "direction has dimension {}, set has dimension {}",
                d.len(),
                self.dim()
            )));
        }
        Ok(match self {
            SmoothConvexSet::Ball { center, radius } => center + d * *radius,
            SmoothConvexSet::Ellipsoid { center, shape, .. } => {
                let qd = shape * d;
                let s = d.dot(&qd).sqrt();
                center + qd / s
            }
            SmoothConvexSet::LambdaBall {
                center,
                half_widths,
                lambda,
                mode,
            } => {
                // d ⊙ |d|^{(2-λ)/(λ-1)} is rewritten as sign(d)|d|^{1/(λ-1)},
                // which stays finite as d_i → 0 for every λ > 1.
                let inv = 1.0 / (lambda - 1.0);
                let num = DVector::from_iterator(
                    d.len(),
                    d.iter().zip(half_widths.iter()).map(|(&di, &wi)| {
                        di.signum() * di.abs().powf(inv) * wi.powf(lambda * inv)
                    }),
                );
                let denom = d
                    .iter()
                    .zip(half_widths.iter())
                    .map(|(&di, &wi)| (di * wi).abs().powf(lambda * inv))
                    .sum::<f64>()
                    .powf(1.0 / lambda);
                let scale = match mode {
                    LambdaMode::Under => 1.0,
                    LambdaMode::Over => (d.len() as f64).powf(1.0 / lambda),
                };
                center + num * (scale / denom)
            }
            SmoothConvexSet::Lifted { base, dim } => {
                let m = base.dim();
                let head = d.rows(0, m).into_owned();
                let tail = d.rows(m, dim - m).into_owned();
                let grad_inv = |v: &Vector, t: &Vector| -> Vector {
                    let mut out = DVector::zeros(*dim);
                    out.rows_mut(0, m).copy_from(&base.level_gradient_inverse(v));
                    out.rows_mut(m, dim - m).copy_from(t);
                    out
                };
                let y = grad_inv(&head, &tail);
                let s = self.level(&y).sqrt();
                grad_inv(&(head / s), &(tail / s))
            }
        })
    }

    /// Unit outward normal at a boundary point.
    pub fn gauss_map(&self, x: &Vector) -> Result<Direction> {
        if x.len() != self.dim() {
            return Err(Error::Domain(format!(
                "point has dimension {}, set has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let residual = (self.level(x) - 1.0).abs();
        if !(residual <= BOUNDARY_TOL) {
            return Err(Error::Domain(format!("level-set residual {residual:.3e}")));
        }
        let normal = match self {
            SmoothConvexSet::Ball { center, .. } => x - center,
            SmoothConvexSet::Ellipsoid {
                center, shape_inv, ..
            } => shape_inv * (x - center),
            SmoothConvexSet::LambdaBall {
                center,
                half_widths,
                lambda,
                ..
            } => DVector::from_iterator(
                x.len(),
                x.iter()
                    .zip(center.iter())
                    .zip(half_widths.iter())
                    .map(|((xi, ci), wi)| {
                        let y = xi - ci;
                        y.signum() * y.abs().powf(lambda - 1.0) * wi.powf(-lambda)
                    }),
            ),
            SmoothConvexSet::Lifted { base, .. } => {
                let m = base.dim();
                let mut g = x.clone();
                let head = x.rows(0, m).into_owned();
                g.rows_mut(0, m).copy_from(&base.level_gradient(&head));
                g
            }
        };
        let norm = normal.norm();
        if !(norm > 0.0) {
            return Err(Error::Domain("point at the set center".into()));
        }
        Direction::new(normal / norm)
    }

    /// Maximizer of `dᵀv` over the set.
    pub fn support_point(&self, d: &Direction) -> Result<Vector> {
        self.inverse_gauss_map(d)
    }

    pub fn support_value(&self, d: &Direction) -> Result<f64> {
        Ok(d.as_vector().dot(&self.support_point(d)?))
    }

    /// Gradient of the level function (ball and ellipsoid only; used by the
    /// lifted level-set route).
    fn level_gradient(&self, x: &Vector) -> Vector {
        match self {
            SmoothConvexSet::Ball { center, radius } => (x - center) * (2.0 / (radius * radius)),
            SmoothConvexSet::Ellipsoid {
                center, shape_inv, ..
            } => shape_inv * (x - center) * 2.0,
            _ => unreachable!("lifted bases are validated at construction"),
        }
    }

    /// Inverse of `∇h` for a centered ball or ellipsoid base.
    fn level_gradient_inverse(&self, d: &Vector) -> Vector {
        match self {
            SmoothConvexSet::Ball { radius, .. } => d * (radius * radius / 2.0),
            SmoothConvexSet::Ellipsoid { shape, .. } => shape * d / 2.0,
            _ => unreachable!("lifted bases are validated at construction"),
        }
    }

    /// Half-widths of the axis-aligned bounding box around [`Self::center`].
    pub fn bounding_half_widths(&self) -> Vector {
        match self {
            SmoothConvexSet::Ball { center, radius } => DVector::from_element(center.len(), *radius),
            SmoothConvexSet::Ellipsoid { shape, .. } => shape.diagonal().map(f64::sqrt),
            SmoothConvexSet::LambdaBall {
                half_widths,
                lambda,
                mode,
                ..
            } => match mode {
                LambdaMode::Under => half_widths.clone(),
                LambdaMode::Over => half_widths * (half_widths.len() as f64).powf(1.0 / lambda),
            },
            SmoothConvexSet::Lifted { base, dim } => {
                let m = base.dim();
                let mut out = DVector::from_element(*dim, 2f64.sqrt());
                out.rows_mut(0, m).copy_from(&base.bounding_half_widths());
                out
            }
        }
    }

    /// Uniform sample from the set. Balls and ellipsoids are sampled
    /// directly; other variants by rejection from the bounding box.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        match self {
            SmoothConvexSet::Ball { center, radius } => center + sample_unit_ball(center.len(), rng) * *radius,
            SmoothConvexSet::Ellipsoid { center, factor, .. } => {
                center + factor * sample_unit_ball(center.len(), rng)
            }
            _ => {
                let c = self.center();
                let hw = self.bounding_half_widths();
                loop {
                    let x = DVector::from_iterator(
                        c.len(),
                        c.iter().zip(hw.iter()).map(|(ci, wi)| ci + wi * rng.random_range(-1.0..=1.0)),
                    );
                    if self.level(&x) <= 1.0 {
                        return x;
                    }
                }
            }
        }
    }

    /// Point of `∂C` on the ray from the center through `center + v`.
    pub fn boundary_point_along(&self, v: &Vector) -> Vector {
        let c = self.center();
        // Every level function here is 2-homogeneous about the center.
        let lv = self.level(&(&c + v));
        &c + v / lv.sqrt()
    }
}

fn check_finite(v: &Vector, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} has non-finite entries")))
    }
}

fn check_liftable(base: &SmoothConvexSet, dim: usize) -> Result<()> {
    let m = base.dim();
    if dim <= m {
        return Err(Error::UnsupportedLift(format!(
            "ambient dimension {dim} must exceed base dimension {m}"
        )));
    }
    match base {
        SmoothConvexSet::Ball { center, .. } | SmoothConvexSet::Ellipsoid { center, .. } => {
            if center.iter().any(|&c| c != 0.0) {
                return Err(Error::UnsupportedLift("base set must be centered at 0".into()));
            }
            Ok(())
        }
        _ => Err(Error::UnsupportedLift(
            "only ball and ellipsoid bases can be lifted".into(),
        )),
    }
}

/// Lift a centered ball/ellipsoid over `R^m` to the ellipsoid
/// `{h(w_{1:m}) + ½‖w_{m+1:n}‖² ≤ 1}` over `R^n`, whose shape matrix is
/// `blockdiag(Q, 2·I_{n-m})` (with `Q = r²I` for a ball).
pub fn lift_set(base: &SmoothConvexSet, n: usize) -> Result<SmoothConvexSet> {
    check_liftable(base, n)?;
    let m = base.dim();
    let mut shape = DMatrix::zeros(n, n);
    match base {
        SmoothConvexSet::Ball { radius, .. } => {
            shape
                .view_mut((0, 0), (m, m))
                .copy_from(&(DMatrix::identity(m, m) * (radius * radius)));
        }
        SmoothConvexSet::Ellipsoid { shape: q, .. } => {
            shape.view_mut((0, 0), (m, m)).copy_from(q);
        }
        _ => unreachable!(),
    }
    for i in m..n {
        shape[(i, i)] = 2.0;
    }
    SmoothConvexSet::ellipsoid(DVector::zeros(n), shape)
}

/// Uniform sample from the unit ball of `R^n`.
pub fn sample_unit_ball<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    let g = sample_gaussian(n, rng);
    let norm = g.norm();
    let r: f64 = rng.random::<f64>().powf(1.0 / n as f64);
    g * (r / norm)
}

pub(crate) fn sample_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    loop {
        let g = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        if g.norm() > 1e-300 {
            return g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_sphere_random;
    use nalgebra::dvector;

    fn dir(v: Vector) -> Direction {
        Direction::new(v).unwrap()
    }

    fn all_variants() -> Vec<SmoothConvexSet> {
        let ell = DMatrix::from_row_slice(3, 3, &[4.0, 0.5, 0.1, 0.5, 1.0, 0.2, 0.1, 0.2, 0.5]);
        vec![
            SmoothConvexSet::ball(dvector![1.0, -2.0, 0.5], 0.7).unwrap(),
            SmoothConvexSet::ellipsoid(dvector![0.3, 0.0, -1.0], ell).unwrap(),
            SmoothConvexSet::lambda_ball(dvector![0.0, 1.0, 0.0], dvector![1.0, 0.5, 2.0], 4.0, LambdaMode::Under)
                .unwrap(),
            SmoothConvexSet::lambda_ball(dvector![0.0, 1.0, 0.0], dvector![1.0, 0.5, 2.0], 16.0, LambdaMode::Over)
                .unwrap(),
            SmoothConvexSet::lifted(SmoothConvexSet::ball(dvector![0.0, 0.0], 0.3).unwrap(), 3).unwrap(),
        ]
    }

    #[test]
    fn inverse_gauss_map_closed_forms() {
        let ball = SmoothConvexSet::ball(dvector![1.0, 0.0], 2.0).unwrap();
        let x = ball.inverse_gauss_map(&dir(dvector![0.0, 1.0])).unwrap();
        assert!((x - dvector![1.0, 2.0]).norm() < 1e-15);

        let ell = SmoothConvexSet::ellipsoid(dvector![0.0, 0.0], DMatrix::from_diagonal(&dvector![4.0, 1.0]))
            .unwrap();
        let x = ell.inverse_gauss_map(&dir(dvector![1.0, 0.0])).unwrap();
        assert!((x - dvector![2.0, 0.0]).norm() < 1e-15);

        let h = 0.5f64.sqrt();
        let lb = SmoothConvexSet::lambda_ball(dvector![0.0, 0.0], dvector![1.0, 1.0], 2.0, LambdaMode::Under).unwrap();
        let x = lb.inverse_gauss_map(&dir(dvector![h, h])).unwrap();
        assert!((x - dvector![h, h]).norm() < 1e-15);
    }

    #[test]
    fn gauss_map_closed_forms() {
        let ball = SmoothConvexSet::ball(dvector![0.0, 0.0], 1.0).unwrap();
        let d = ball.gauss_map(&dvector![0.0, -1.0]).unwrap();
        assert!((d.as_vector() - dvector![0.0, -1.0]).norm() < 1e-15);
        let ell = SmoothConvexSet::ellipsoid(dvector![0.0, 0.0], DMatrix::from_diagonal(&dvector![4.0, 1.0]))
            .unwrap();
        let d = ell.gauss_map(&dvector![2.0, 0.0]).unwrap();
        assert!((d.as_vector() - dvector![1.0, 0.0]).norm() < 1e-15);
    }

    #[test]
    fn gauss_map_rejects_off_boundary_and_center() {
        let ball = SmoothConvexSet::ball(dvector![0.0, 0.0], 1.0).unwrap();
        assert!(matches!(ball.gauss_map(&dvector![0.5, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(ball.gauss_map(&dvector![0.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn round_trip_all_variants() {
        let mut rng = crate::rng::seeded(11);
        for set in all_variants() {
            for d in sample_sphere_random(set.dim(), 1000, &mut rng) {
                let x = set.inverse_gauss_map(&d).unwrap();
                assert!((set.level(&x) - 1.0).abs() < 1e-10);
                let back = set.gauss_map(&x).unwrap();
                assert!((back.as_vector() - d.as_vector()).norm() < 1e-9, "{set:?}");
            }
        }
    }

    #[test]
    fn support_point_dominates_boundary_samples() {
        let mut rng = crate::rng::seeded(5);
        for set in all_variants() {
            let dirs = sample_sphere_random(set.dim(), 50, &mut rng);
            let boundary: Vec<Vector> = (0..1000)
                .map(|_| set.boundary_point_along(&sample_gaussian(set.dim(), &mut rng)))
                .collect();
            for d in &dirs {
                let best = set.support_value(d).unwrap();
                for v in &boundary {
                    assert!(best - d.as_vector().dot(v) >= -1e-9);
                }
            }
        }
    }

    #[test]
    fn lambda_sandwich_around_box() {
        let hw = dvector![0.01, 0.01, 0.01];
        let under = SmoothConvexSet::lambda_ball(dvector![0.0, 0.0, 0.0], hw.clone(), 8.0, LambdaMode::Under).unwrap();
        let over = SmoothConvexSet::lambda_ball(dvector![0.0, 0.0, 0.0], hw.clone(), 8.0, LambdaMode::Over).unwrap();
        let mut rng = crate::rng::seeded(2);
        for d in sample_sphere_random(3, 2000, &mut rng) {
            let x = under.inverse_gauss_map(&d).unwrap();
            assert!(x.amax() <= 0.01 * (1.0 + 1e-12));
        }
        for corner in 0..8 {
            let c = DVector::from_iterator(3, (0..3).map(|i| if corner >> i & 1 == 1 { 0.01 } else { -0.01 }));
            assert!(over.contains(&c, 1e-12));
        }
    }

    #[test]
    fn lift_set_shapes_and_projection() {
        let lifted = lift_set(&SmoothConvexSet::ball(dvector![0.0, 0.0], 1.0).unwrap(), 3).unwrap();
        match &lifted {
            SmoothConvexSet::Ellipsoid { shape, .. } => {
                assert!((shape - DMatrix::from_diagonal(&dvector![1.0, 1.0, 2.0])).amax() < 1e-15)
            }
            _ => panic!("expected ellipsoid"),
        }
        let small = lift_set(&SmoothConvexSet::ball(dvector![0.0, 0.0], 1e-2).unwrap(), 3).unwrap();
        match &small {
            SmoothConvexSet::Ellipsoid { shape, .. } => {
                assert!((shape - DMatrix::from_diagonal(&dvector![1e-4, 1e-4, 2.0])).amax() < 1e-18)
            }
            _ => panic!("expected ellipsoid"),
        }
        // Projection of boundary points onto the first m coordinates lands in the base.
        let base = SmoothConvexSet::ball(dvector![0.0, 0.0], 1e-2).unwrap();
        let mut rng = crate::rng::seeded(9);
        for _ in 0..1000 {
            let v = small.boundary_point_along(&sample_gaussian(3, &mut rng));
            assert!(base.contains(&v.rows(0, 2).into_owned(), 1e-12));
        }
        // base × {0} is inside the lift.
        for d in sample_sphere_random(2, 100, &mut rng) {
            let b = base.inverse_gauss_map(&d).unwrap();
            assert!(small.contains(&dvector![b[0], b[1], 0.0], 1e-12));
        }
    }

    #[test]
    fn lifted_level_set_route_matches_ellipsoid() {
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 0.5]);
        for base in [
            SmoothConvexSet::ball(dvector![0.0, 0.0], 0.4).unwrap(),
            SmoothConvexSet::ellipsoid(dvector![0.0, 0.0], q).unwrap(),
        ] {
            let by_level = SmoothConvexSet::lifted(base.clone(), 4).unwrap();
            let by_shape = lift_set(&base, 4).unwrap();
            let mut rng = crate::rng::seeded(3);
            for d in sample_sphere_random(4, 500, &mut rng) {
                let a = by_level.inverse_gauss_map(&d).unwrap();
                let b = by_shape.inverse_gauss_map(&d).unwrap();
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lift_rejects_unsupported_bases() {
        let off = SmoothConvexSet::ball(dvector![0.1, 0.0], 1.0).unwrap();
        assert!(matches!(lift_set(&off, 3), Err(Error::UnsupportedLift(_))));
        let lb = SmoothConvexSet::lambda_ball(dvector![0.0, 0.0], dvector![1.0, 1.0], 4.0, LambdaMode::Under).unwrap();
        assert!(matches!(lift_set(&lb, 3), Err(Error::UnsupportedLift(_))));
        let ball = SmoothConvexSet::ball(dvector![0.0, 0.0], 1.0).unwrap();
        assert!(matches!(lift_set(&ball, 2), Err(Error::UnsupportedLift(_))));
    }

    #[test]
    fn constructors_validate() {
        assert!(SmoothConvexSet::ball(dvector![0.0], 0.0).is_err());
        assert!(SmoothConvexSet::ellipsoid(dvector![0.0, 0.0], DMatrix::from_diagonal(&dvector![1.0, -1.0])).is_err());
        assert!(SmoothConvexSet::lambda_ball(dvector![0.0], dvector![1.0], 1.0, LambdaMode::Under).is_err());
        assert!(SmoothConvexSet::lambda_ball(dvector![0.0], dvector![0.0], 2.0, LambdaMode::Under).is_err());
    }

    #[test]
    fn uniform_samples_stay_inside() {
        let mut rng = crate::rng::seeded(4);
        for set in all_variants() {
            for _ in 0..200 {
                assert!(set.contains(&set.sample_uniform(&mut rng), 1e-12));
            }
        }
    }
}
