use super::{InitialSet, TimeGrid};
use crate::error::{Error, Result};
use crate::geometry::{Direction, SmoothConvexSet, Vector};
use crate::systems::{check_time_window, System};

/// `‖g(t,x)ᵀp‖` below this is reported as a singular costate.
pub const SINGULAR_TOL: f64 = 1e-12;
/// Admissible range of the unnormalized costate norm.
pub const COSTATE_MIN: f64 = 1e-8;
pub const COSTATE_MAX: f64 = 1e8;

/// States, costates and extremal disturbances at every grid node, plus the
/// disturbance used at each RK4 stage (4 per step, in stage order).
#[derive(Clone, Debug, PartialEq)]
pub struct ExtremalTrajectory {
    pub grid: TimeGrid,
    pub d0: Direction,
    pub x: Vec<Vector>,
    pub p: Vec<Vector>,
    pub w: Vec<Vector>,
    pub stage_w: Vec<Vector>,
}

/// `(ẋ, ṗ, w)` of the augmented system; `w` minimizes `pᵀg(t,x)w` over `W`.
pub fn augmented_rhs(
    sys: &dyn System,
    wset: &SmoothConvexSet,
    t: f64,
    x: &Vector,
    p: &Vector,
) -> Result<(Vector, Vector, Vector)> {
    let g = sys.input_matrix(t, x);
    let gp = g.transpose() * p;
    let norm = gp.norm();
    if !(norm >= SINGULAR_TOL) {
        return Err(Error::SingularCostate { t, norm });
    }
    let w = wset.inverse_gauss_map(&Direction::normalize(-gp)?)?;
    let xdot = sys.drift(t, x) + &g * &w;
    let jac = sys.drift_jacobian(t, x) + sys.input_jacobian_times(t, x, &w);
    let pdot = -(jac.transpose() * p);
    Ok((xdot, pdot, w))
}

/// `x(0)` and `p(0) = d0` of the augmented system.
pub fn initial_pair(d0: &Direction, x0: &InitialSet) -> Result<(Vector, Vector)> {
    let x = match x0 {
        InitialSet::Singleton(x) => x.clone(),
        InitialSet::Ovaloid(set) => set.inverse_gauss_map(&-d0)?,
    };
    Ok((x, d0.as_vector().clone()))
}

/// Classical fixed-step RK4; returns the state at every node.
pub fn rk4_integrate<F>(grid: &TimeGrid, y0: Vector, mut rhs: F) -> Result<Vec<Vector>>
where
    F: FnMut(f64, &Vector) -> Result<Vector>,
{
    grid.validate()?;
    let h = grid.step();
    let mut out = Vec::with_capacity(grid.nodes());
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { node: 0, t: grid.t0 });
    }
    let mut y = y0;
    out.push(y.clone());
    for k in 0..grid.steps {
        let t = grid.time(k);
        let k1 = rhs(t, &y)?;
        let k2 = rhs(t + 0.5 * h, &(&y + &k1 * (0.5 * h)))?;
        let k3 = rhs(t + 0.5 * h, &(&y + &k2 * (0.5 * h)))?;
        let k4 = rhs(t + h, &(&y + &k3 * h))?;
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                node: k + 1,
                t: grid.time(k + 1),
            });
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn check_square(sys: &dyn System, wset: &SmoothConvexSet) -> Result<()> {
    let n = sys.state_dim();
    if sys.disturbance_dim() != n || wset.dim() != n {
        return Err(Error::Assumption(format!(
            "extremal trajectories need n = m = dim W (n = {n}, m = {}, dim W = {}); relax a rank-deficient g first",
            sys.disturbance_dim(),
            wset.dim()
        )));
    }
    Ok(())
}

/// Integrates the augmented system from an arbitrary `(x0, p0)`; `p0` need
/// not be unit norm.
pub fn integrate_costate(
    sys: &dyn System,
    wset: &SmoothConvexSet,
    x0: Vector,
    p0: Vector,
    grid: &TimeGrid,
) -> Result<(Vec<Vector>, Vec<Vector>, Vec<Vector>)> {
    check_square(sys, wset)?;
    check_time_window(sys, grid.t0, grid.tf)?;
    let n = sys.state_dim();
    if x0.len() != n || p0.len() != n {
        return Err(Error::Config(format!("initial pair has wrong dimension (n = {n})")));
    }
    let mut y0 = Vector::zeros(2 * n);
    y0.rows_mut(0, n).copy_from(&x0);
    y0.rows_mut(n, n).copy_from(&p0);
    let mut stage_w = Vec::with_capacity(4 * grid.steps);
    let nodes = rk4_integrate(grid, y0, |t, y| {
        let x = y.rows(0, n).into_owned();
        let p = y.rows(n, n).into_owned();
        let (xdot, pdot, w) = augmented_rhs(sys, wset, t, &x, &p)?;
        stage_w.push(w);
        let mut dy = Vector::zeros(2 * n);
        dy.rows_mut(0, n).copy_from(&xdot);
        dy.rows_mut(n, n).copy_from(&pdot);
        Ok(dy)
    })?;
    let mut xs = Vec::with_capacity(nodes.len());
    let mut ps = Vec::with_capacity(nodes.len());
    for (k, y) in nodes.into_iter().enumerate() {
        let p = y.rows(n, n).into_owned();
        let norm = p.norm();
        if !(COSTATE_MIN..=COSTATE_MAX).contains(&norm) {
            return Err(Error::CostateScale { t: grid.time(k), norm });
        }
        xs.push(y.rows(0, n).into_owned());
        ps.push(p);
    }
    Ok((xs, ps, stage_w))
}

/// The extremal trajectory `t ↦ x_{d0}(t)` with its costate and disturbance.
pub fn extremal_trajectory(
    sys: &dyn System,
    wset: &SmoothConvexSet,
    x0: &InitialSet,
    d0: &Direction,
    grid: &TimeGrid,
) -> Result<ExtremalTrajectory> {
    let (xi, pi) = initial_pair(d0, x0)?;
    let (x, p, stage_w) = integrate_costate(sys, wset, xi, pi, grid)?;
    let w = x
        .iter()
        .zip(p.iter())
        .enumerate()
        .map(|(k, (xk, pk))| augmented_rhs(sys, wset, grid.time(k), xk, pk).map(|r| r.2))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExtremalTrajectory {
        grid: *grid,
        d0: d0.clone(),
        x,
        p,
        w,
        stage_w,
    })
}

/// Integrates `ẋ = f + g·w` alone, feeding stage `i` of the RK4 scheme the
/// disturbance `stage_w[i]`.
pub fn replay_disturbances(sys: &dyn System, x0: Vector, grid: &TimeGrid, stage_w: &[Vector]) -> Result<Vec<Vector>> {
    if stage_w.len() != 4 * grid.steps {
        return Err(Error::Config(format!(
            "replay needs {} stage disturbances, got {}",
            4 * grid.steps,
            stage_w.len()
        )));
    }
    let mut i = 0;
    rk4_integrate(grid, x0, |t, x| {
        let w = &stage_w[i];
        i += 1;
        Ok(sys.drift(t, x) + sys.input_matrix(t, x) * w)
    })
}
