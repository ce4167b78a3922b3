//! Relaxations for uncertainty sets outside the smooth square setting.
//!
//! Boxes are sandwiched between λ-balls, `under ⊆ box ⊆ over`, which converge
//! to the box as `λ → ∞`. A rank-deficient `g ∈ R^{n×m}` is completed to the
//! invertible `ĝ_ε = [g | ε g_{m+1} … ε g_n]` and paired with a lifted
//! disturbance set over `Rⁿ`; its hulls over-approximate the original ones
//! with an `O(ε)` gap.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{lift_set, sample_sphere_random, Direction, LambdaMode, Matrix, SmoothConvexSet, Vector};
use crate::reach::{estimate_hulls, HullEstimate, InitialSet, TimeGrid};
use crate::systems::System;

/// Box uncertainty `|w_i| ≤ δw̄_i`, `|x_i − x̄₀_i| ≤ δx̄₀_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct RectSpec {
    pub delta_w: Vector,
    pub x0_center: Vector,
    pub delta_x0: Vector,
}

impl RectSpec {
    pub fn new(delta_w: Vector, x0_center: Vector, delta_x0: Vector) -> Result<Self> {
        if delta_w.iter().chain(delta_x0.iter()).any(|v| !(*v > 0.0)) {
            return Err(Error::Config("box half-widths must be strictly positive".into()));
        }
        if x0_center.len() != delta_x0.len() {
            return Err(Error::Config("initial box center and half-widths differ in length".into()));
        }
        Ok(RectSpec {
            delta_w,
            x0_center,
            delta_x0,
        })
    }
}

/// λ-ball surrogates of the disturbance and initial boxes.
#[derive(Clone, Debug, PartialEq)]
pub struct RectSets {
    pub w_under: SmoothConvexSet,
    pub w_over: SmoothConvexSet,
    pub x0_under: SmoothConvexSet,
    pub x0_over: SmoothConvexSet,
}

impl RectSets {
    pub fn disturbance(&self, mode: LambdaMode) -> &SmoothConvexSet {
        match mode {
            LambdaMode::Under => &self.w_under,
            LambdaMode::Over => &self.w_over,
        }
    }

    pub fn initial(&self, mode: LambdaMode) -> &SmoothConvexSet {
        match mode {
            LambdaMode::Under => &self.x0_under,
            LambdaMode::Over => &self.x0_over,
        }
    }
}

pub fn rect_sets(spec: &RectSpec, lambda: f64) -> Result<RectSets> {
    if !(lambda > 1.0) {
        return Err(Error::Config(format!("lambda must exceed 1, got {lambda}")));
    }
    let zero = Vector::zeros(spec.delta_w.len());
    let ball = |c: &Vector, d: &Vector, mode| SmoothConvexSet::lambda_ball(c.clone(), d.clone(), lambda, mode);
    Ok(RectSets {
        w_under: ball(&zero, &spec.delta_w, LambdaMode::Under)?,
        w_over: ball(&zero, &spec.delta_w, LambdaMode::Over)?,
        x0_under: ball(&spec.x0_center, &spec.delta_x0, LambdaMode::Under)?,
        x0_over: ball(&spec.x0_center, &spec.delta_x0, LambdaMode::Over)?,
    })
}

/// Hulls with both boxes replaced by their λ-ball surrogates of `mode`.
pub fn estimate_hulls_rect(
    sys: &dyn System,
    spec: &RectSpec,
    lambda: f64,
    mode: LambdaMode,
    dirs: &[Direction],
    grid: &TimeGrid,
) -> Result<HullEstimate> {
    let sets = rect_sets(spec, lambda)?;
    estimate_hulls(
        sys,
        sets.disturbance(mode),
        &InitialSet::Ovaloid(sets.initial(mode).clone()),
        dirs,
        grid,
    )
}

/// Constant unit columns completing the columns of `g` to a basis of `Rⁿ`.
///
/// Standard basis vectors are tried in order and kept when they raise the
/// rank; if that fails, unit vectors drawn from `seed` are used instead.
pub fn complete_basis(g: &Matrix, seed: u64) -> Result<Matrix> {
    let (n, m) = g.shape();
    if m >= n {
        return Err(Error::Config(format!("g is {n}x{m}; nothing to complete")));
    }
    let well_conditioned = |cols: &[Vector]| {
        let mat = Matrix::from_columns(cols);
        let sv = mat.singular_values();
        sv.min() > 1e-6 * sv.max().max(1.0)
    };
    let mut cols: Vec<Vector> = (0..m).map(|j| g.column(j).into_owned()).collect();
    if !well_conditioned(&cols) {
        return Err(Error::Assumption("g does not have full column rank".into()));
    }
    let mut extra = Vec::new();
    for i in 0..n {
        if extra.len() == n - m {
            break;
        }
        let mut trial = cols.clone();
        let e = Vector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 });
        trial.push(e.clone());
        if well_conditioned(&trial) {
            cols = trial;
            extra.push(e);
        }
    }
    let mut rng = crate::rng::seeded(seed);
    let mut attempts = 0;
    while extra.len() < n - m {
        attempts += 1;
        if attempts > 1000 {
            return Err(Error::Assumption("could not complete g to a basis".into()));
        }
        let e = sample_sphere_random(n, 1, &mut rng).remove(0).into_vector();
        let mut trial = cols.clone();
        trial.push(e.clone());
        if well_conditioned(&trial) {
            cols = trial;
            extra.push(e);
        }
    }
    Ok(Matrix::from_columns(&extra))
}

/// The square system with `ĝ_ε(t,x) = [g(t,x) | ε·G_extra]`.
pub struct EpsExtension<S> {
    base: S,
    extra: Matrix,
    eps: f64,
}

impl<S: System> EpsExtension<S> {
    /// `extra` holds `n − m` constant unit columns.
    pub fn new(base: S, extra: Matrix, eps: f64) -> Result<Self> {
        let n = base.state_dim();
        let m = base.disturbance_dim();
        if m >= n || extra.shape() != (n, n - m) {
            return Err(Error::Config(format!(
                "extension of an {n}x{m} g needs {} extra columns of length {n}",
                n.saturating_sub(m)
            )));
        }
        if !(eps > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        for (j, c) in extra.column_iter().enumerate() {
            if (c.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("extra column {j} is not unit norm")));
            }
        }
        Ok(EpsExtension { base, extra, eps })
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn base(&self) -> &S {
        &self.base
    }

    /// Smallest singular value of `ĝ_ε` at `(t, x)`.
    pub fn min_singular_value(&self, t: f64, x: &Vector) -> f64 {
        self.input_matrix(t, x).singular_values().min()
    }

    /// Fails unless `ĝ_ε` is invertible (smallest singular value above
    /// `10⁻¹⁰`) at `probes` random states drawn from `box_center ± box_half`.
    pub fn check_invertible(&self, t: f64, box_center: &Vector, box_half: &Vector, probes: usize, seed: u64) -> Result<()> {
        let mut rng = crate::rng::seeded(seed);
        for _ in 0..probes {
            let x = Vector::from_fn(box_center.len(), |i, _| {
                box_center[i] + box_half[i] * rng.random_range(-1.0..=1.0)
            });
            let s = self.min_singular_value(t, &x);
            if !(s > 1e-10) {
                return Err(Error::Assumption(format!("extended g is singular at {x:?} (sigma = {s:.3e})")));
            }
        }
        Ok(())
    }
}

impl<S: System> System for EpsExtension<S> {
    fn state_dim(&self) -> usize {
        self.base.state_dim()
    }
    fn disturbance_dim(&self) -> usize {
        self.base.state_dim()
    }
    fn drift(&self, t: f64, x: &Vector) -> Vector {
        self.base.drift(t, x)
    }
    fn input_matrix(&self, t: f64, x: &Vector) -> Matrix {
        let g = self.base.input_matrix(t, x);
        let (n, m) = g.shape();
        let mut out = Matrix::zeros(n, n);
        out.columns_mut(0, m).copy_from(&g);
        out.columns_mut(m, n - m).copy_from(&(&self.extra * self.eps));
        out
    }
    fn drift_jacobian(&self, t: f64, x: &Vector) -> Matrix {
        self.base.drift_jacobian(t, x)
    }
    fn input_jacobian_times(&self, t: f64, x: &Vector, w: &Vector) -> Matrix {
        let m = self.base.disturbance_dim();
        self.base.input_jacobian_times(t, x, &w.rows(0, m).into_owned())
    }
    fn label(&self) -> String {
        format!("{}+eps({})", self.base.label(), self.eps)
    }
    fn time_domain(&self) -> Option<(f64, f64)> {
        self.base.time_domain()
    }
}

/// Lifted disturbance set `h(w_{1:m}) + ½‖w_{m+1:n}‖² ≤ 1` over `Rⁿ`.
pub fn lifted_disturbance(base: &SmoothConvexSet, n: usize) -> Result<SmoothConvexSet> {
    lift_set(base, n)
}

/// Hulls of the ε-extended system driven by the lifted disturbance set.
pub fn estimate_hulls_fullrank_relax<S: System>(
    ext: &EpsExtension<S>,
    base_w: &SmoothConvexSet,
    x0: &InitialSet,
    dirs: &[Direction],
    grid: &TimeGrid,
) -> Result<HullEstimate> {
    let lifted = lifted_disturbance(base_w, ext.state_dim())?;
    estimate_hulls(ext, &lifted, x0, dirs, grid)
}
