//! Comparison methods and Monte Carlo validation.
//!
//! * RandUP: hulls of rollouts with i.i.d. uniform disturbances per step.
//! * Lipschitz tube: ellipsoids `{y : (y − c_k)ᵀQ_k⁻¹(y − c_k) ≤ 1}` around
//!   a nominal rollout of `x_{k+1} = f̄(x_k) + w_k`, grown by the recursion
//!   `Q_{k+1} = (c+1)/c·ĀQ_kĀᵀ + (1+c)·n(w̄ + H̄λ_max(Q_k)/2)²I` with
//!   `c² = tr(ĀQ_kĀᵀ)/tr(n(w̄ + H̄λ_max(Q_k)/2)²I)`.
//! * Monte Carlo rollouts of the continuous system with `w` held constant
//!   over each RK4 step.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{distance_to_hull, Direction, HullVertices, Matrix, SmoothConvexSet, Vector, DEFAULT_HULL_TOL};
use crate::reach::{rk4_integrate, HullEstimate, InitialSet, Provenance, TimeGrid};
use crate::systems::{check_time_window, System};

const JACOBIAN_STEP: f64 = 1e-6;

/// How the disturbance enters the discrete step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DisturbanceMode {
    /// `x_{k+1} = f̄(x_k) + w_k`.
    Additive,
    /// `w_k` held constant in `ẋ = f + g w` over the step.
    Held,
}

/// `K` steps of length `Δt`, each integrated with `substeps` RK4 steps.
pub struct DiscreteSystem<'a> {
    sys: &'a dyn System,
    t0: f64,
    dt: f64,
    steps: usize,
    substeps: usize,
    mode: DisturbanceMode,
}

impl<'a> DiscreteSystem<'a> {
    pub fn new(sys: &'a dyn System, t0: f64, dt: f64, steps: usize, substeps: usize, mode: DisturbanceMode) -> Result<Self> {
        if !(dt > 0.0) || steps == 0 || substeps == 0 {
            return Err(Error::Config("discrete system needs dt > 0 and at least one (sub)step".into()));
        }
        check_time_window(sys, t0, t0 + dt * steps as f64)?;
        Ok(DiscreteSystem {
            sys,
            t0,
            dt,
            steps,
            substeps,
            mode,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn mode(&self) -> DisturbanceMode {
        self.mode
    }

    pub fn system(&self) -> &dyn System {
        self.sys
    }

    /// Grid of the discrete nodes `t0 + kΔt`.
    pub fn grid(&self) -> TimeGrid {
        TimeGrid {
            t0: self.t0,
            tf: self.t0 + self.dt * self.steps as f64,
            steps: self.steps,
        }
    }

    fn substep_grid(&self, k: usize) -> TimeGrid {
        let a = self.t0 + self.dt * k as f64;
        TimeGrid {
            t0: a,
            tf: a + self.dt,
            steps: self.substeps,
        }
    }

    /// Undisturbed step map `f̄` from node `k`.
    pub fn nominal_step(&self, k: usize, x: &Vector) -> Result<Vector> {
        let nodes = rk4_integrate(&self.substep_grid(k), x.clone(), |t, y| Ok(self.sys.drift(t, y)))?;
        Ok(nodes.into_iter().last().expect("grid has nodes"))
    }

    /// Disturbed step from node `k`, according to the mode.
    pub fn step(&self, k: usize, x: &Vector, w: &Vector) -> Result<Vector> {
        match self.mode {
            DisturbanceMode::Additive => Ok(self.nominal_step(k, x)? + w),
            DisturbanceMode::Held => {
                let nodes = rk4_integrate(&self.substep_grid(k), x.clone(), |t, y| {
                    Ok(self.sys.drift(t, y) + self.sys.input_matrix(t, y) * w)
                })?;
                Ok(nodes.into_iter().last().expect("grid has nodes"))
            }
        }
    }

    /// `∇_x f̄` at node `k` by central differences.
    pub fn step_jacobian(&self, k: usize, x: &Vector) -> Result<Matrix> {
        let n = x.len();
        let mut jac = Matrix::zeros(n, n);
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += JACOBIAN_STEP;
            xm[j] -= JACOBIAN_STEP;
            let col = (self.nominal_step(k, &xp)? - self.nominal_step(k, &xm)?) / (2.0 * JACOBIAN_STEP);
            jac.set_column(j, &col);
        }
        Ok(jac)
    }

    /// Undisturbed trajectory from `x0`, one state per node.
    pub fn nominal_rollout(&self, x0: &Vector) -> Result<Vec<Vector>> {
        let mut xs = Vec::with_capacity(self.steps + 1);
        xs.push(x0.clone());
        for k in 0..self.steps {
            let next = self.nominal_step(k, &xs[k])?;
            xs.push(next);
        }
        Ok(xs)
    }
}

/// States of many rollouts over a common grid, stored flat
/// (`rollout`-major, then node, then coordinate).
#[derive(Clone, Debug, PartialEq)]
pub struct Rollouts {
    pub grid: TimeGrid,
    pub dim: usize,
    pub count: usize,
    data: Vec<f64>,
}

impl Rollouts {
    fn from_trajectories(grid: TimeGrid, dim: usize, trajectories: Vec<Vec<Vector>>) -> Self {
        let count = trajectories.len();
        let mut data = Vec::with_capacity(count * grid.nodes() * dim);
        for tr in trajectories {
            for x in tr {
                data.extend(x.iter().copied());
            }
        }
        Rollouts { grid, dim, count, data }
    }

    pub fn state(&self, rollout: usize, node: usize) -> Vector {
        let start = (rollout * self.grid.nodes() + node) * self.dim;
        Vector::from_column_slice(&self.data[start..start + self.dim])
    }

    /// All rollout states at `node`.
    pub fn node_states(&self, node: usize) -> Vec<Vector> {
        (0..self.count).map(|i| self.state(i, node)).collect()
    }
}

fn held_rollout<R: Rng + ?Sized>(
    sys: &dyn System,
    wset: &SmoothConvexSet,
    x0: Vector,
    grid: &TimeGrid,
    rng: &mut R,
) -> Result<Vec<Vector>> {
    let h = grid.step();
    let mut xs = Vec::with_capacity(grid.nodes());
    xs.push(x0);
    for k in 0..grid.steps {
        let w = wset.sample_uniform(rng);
        let one = TimeGrid {
            t0: grid.time(k),
            tf: grid.time(k) + h,
            steps: 1,
        };
        let next = rk4_integrate(&one, xs[k].clone(), |t, y| Ok(sys.drift(t, y) + sys.input_matrix(t, y) * &w))?;
        xs.push(next.into_iter().last().expect("two nodes"));
    }
    Ok(xs)
}

/// Rollouts of the continuous system with `w` uniform in `W`, held constant
/// over each RK4 step of `grid`; rollout `i` uses sub-stream `i` of `seed`.
pub fn monte_carlo_rollouts(
    sys: &dyn System,
    wset: &SmoothConvexSet,
    x0: &InitialSet,
    count: usize,
    seed: u64,
    grid: &TimeGrid,
) -> Result<Rollouts> {
    if count == 0 {
        return Err(Error::Config("Monte Carlo needs at least one rollout".into()));
    }
    check_time_window(sys, grid.t0, grid.tf)?;
    let trajectories = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = crate::rng::stream(seed, i as u64);
            let start = x0.sample(&mut rng);
            held_rollout(sys, wset, start, grid, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Rollouts::from_trajectories(*grid, sys.state_dim(), trajectories))
}

/// Rollouts of a discrete system with `w_k` uniform in `W`.
pub fn monte_carlo_discrete(
    dsys: &DiscreteSystem<'_>,
    wset: &SmoothConvexSet,
    x0: &InitialSet,
    count: usize,
    seed: u64,
) -> Result<Rollouts> {
    if count == 0 {
        return Err(Error::Config("Monte Carlo needs at least one rollout".into()));
    }
    let trajectories = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = crate::rng::stream(seed, i as u64);
            let mut xs = vec![x0.sample(&mut rng)];
            for k in 0..dsys.steps() {
                let w = wset.sample_uniform(&mut rng);
                let next = dsys.step(k, &xs[k], &w)?;
                xs.push(next);
            }
            Ok(xs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Rollouts::from_trajectories(dsys.grid(), dsys.system().state_dim(), trajectories))
}

/// RandUP: per-node hulls of `samples` discrete rollouts with uniform
/// i.i.d. disturbances and initial states.
pub fn randup_hulls(
    dsys: &DiscreteSystem<'_>,
    wset: &SmoothConvexSet,
    x0: &InitialSet,
    samples: usize,
    seed: u64,
) -> Result<HullEstimate> {
    let r = monte_carlo_discrete(dsys, wset, x0, samples, seed)?;
    let points = (0..r.grid.nodes()).map(|k| r.node_states(k)).collect();
    HullEstimate::from_node_points(
        r.grid,
        points,
        Provenance {
            directions: samples,
            scheme: "randup".into(),
            seed: Some(seed),
        },
    )
}

/// Outcome of a Monte Carlo containment check.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Containment {
    pub checked: usize,
    pub violations: usize,
    /// Largest excess over the allowed distance; negative when every sample
    /// is strictly inside.
    pub max_excess: f64,
}

impl Containment {
    fn merge(self, other: Containment) -> Containment {
        Containment {
            checked: self.checked + other.checked,
            violations: self.violations + other.violations,
            max_excess: self.max_excess.max(other.max_excess),
        }
    }

    fn empty() -> Containment {
        Containment {
            checked: 0,
            violations: 0,
            max_excess: f64::NEG_INFINITY,
        }
    }
}

/// Counts rollout states with `d(x, hull_k) > ε_k + slack`, over every node.
pub fn check_containment(est: &HullEstimate, rollouts: &Rollouts, slack: f64) -> Result<Containment> {
    if est.hulls.len() != rollouts.grid.nodes() {
        return Err(Error::Config(format!(
            "{} hull nodes against {} rollout nodes",
            est.hulls.len(),
            rollouts.grid.nodes()
        )));
    }
    Ok((0..est.hulls.len())
        .into_par_iter()
        .map(|k| {
            let mut c = Containment::empty();
            for i in 0..rollouts.count {
                let excess = distance_to_hull(&rollouts.state(i, k), &est.hulls[k], DEFAULT_HULL_TOL) - est.padding[k];
                c.checked += 1;
                c.max_excess = c.max_excess.max(excess);
                if excess > slack {
                    c.violations += 1;
                }
            }
            c
        })
        .reduce(Containment::empty, Containment::merge))
}

/// Counts rollout states outside the tube: `(y − c_k)ᵀQ_k⁻¹(y − c_k) > 1 + tol`.
/// The excess is reported in that normalized distance.
pub fn check_tube(tube: &EllipsoidTube, rollouts: &Rollouts, tol: f64) -> Result<Containment> {
    if tube.len() != rollouts.grid.nodes() {
        return Err(Error::Config("tube and rollouts have different node counts".into()));
    }
    Ok((0..tube.len())
        .into_par_iter()
        .map(|k| {
            let mut c = Containment::empty();
            for i in 0..rollouts.count {
                let excess = tube.normalized_distance(k, &rollouts.state(i, k)) - 1.0;
                c.checked += 1;
                c.max_excess = c.max_excess.max(excess);
                if excess > tol {
                    c.violations += 1;
                }
            }
            c
        })
        .reduce(Containment::empty, Containment::merge))
}

/// Nominal centers and shape matrices of an ellipsoidal tube.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipsoidTube {
    pub centers: Vec<Vector>,
    pub shapes: Vec<Matrix>,
}

impl EllipsoidTube {
    /// `(y − c_k)ᵀQ_k⁻¹(y − c_k)`, via the pseudo-inverse; infinite when
    /// `y − c_k` leaves the range of `Q_k`.
    pub fn normalized_distance(&self, k: usize, y: &Vector) -> f64 {
        let e = y - &self.centers[k];
        let q = &self.shapes[k];
        if q.norm() == 0.0 {
            return if e.norm() == 0.0 { 0.0 } else { f64::INFINITY };
        }
        let eig = q.clone().symmetric_eigen();
        let lmax = eig.eigenvalues.max();
        let mut total = 0.0;
        for (i, lam) in eig.eigenvalues.iter().enumerate() {
            let c = eig.eigenvectors.column(i).dot(&e);
            if *lam > 1e-14 * lmax {
                total += c * c / lam;
            } else if c.abs() > 1e-12 {
                return f64::INFINITY;
            }
        }
        total
    }

    /// Boundary points `c_k + Q_k d/√(dᵀQ_k d)` along `dirs`.
    pub fn boundary_points(&self, k: usize, dirs: &[Direction]) -> Vec<Vector> {
        let q = &self.shapes[k];
        dirs.iter()
            .map(|d| {
                let qd = q * d.as_vector();
                let s = d.as_vector().dot(&qd);
                if s > 0.0 {
                    &self.centers[k] + qd / s.sqrt()
                } else {
                    self.centers[k].clone()
                }
            })
            .collect()
    }

    pub fn boundary_hull(&self, k: usize, dirs: &[Direction]) -> Result<HullVertices> {
        HullVertices::from_points(self.boundary_points(k, dirs))
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Lipschitz-based ellipsoid recursion around the nominal rollout from `x0`.
/// Requires the additive disturbance model.
pub fn lipschitz_tube(dsys: &DiscreteSystem<'_>, x0: &Vector, wbar: f64, hbar: f64) -> Result<EllipsoidTube> {
    if dsys.mode() != DisturbanceMode::Additive {
        return Err(Error::Config("the Lipschitz tube models additive disturbances".into()));
    }
    if !(wbar >= 0.0) || !(hbar >= 0.0) {
        return Err(Error::Config("tube needs w̄ >= 0 and H̄ >= 0".into()));
    }
    let n = x0.len();
    let centers = dsys.nominal_rollout(x0)?;
    let mut shapes = vec![Matrix::zeros(n, n)];
    for k in 0..dsys.steps() {
        let a = dsys.step_jacobian(k, &centers[k])?;
        let q = &shapes[k];
        let lmax = q.clone().symmetric_eigen().eigenvalues.max().max(0.0);
        let qnom = &a * q * a.transpose();
        let radius = wbar + 0.5 * hbar * lmax;
        let qw = Matrix::identity(n, n) * (n as f64 * radius * radius);
        let (tn, tw) = (qnom.trace(), qw.trace());
        let next = if tn <= 0.0 {
            qw
        } else if tw <= 0.0 {
            qnom
        } else {
            let c = (tn / tw).sqrt();
            qnom * ((c + 1.0) / c) + qw * (1.0 + c)
        };
        shapes.push((&next + next.transpose()) * 0.5);
    }
    Ok(EllipsoidTube { centers, shapes })
}

/// `H̄` for the tube: the largest `‖∇f̄(x) − ∇f̄(y)‖₂/‖x − y‖` over `probes`
/// random pairs at distance `pair_gap` inside `center ± half`, at node `k`.
pub fn estimate_step_hessian_bound(
    dsys: &DiscreteSystem<'_>,
    k: usize,
    center: &Vector,
    half: &Vector,
    probes: usize,
    pair_gap: f64,
    seed: u64,
) -> Result<f64> {
    let n = center.len();
    let values = (0..probes)
        .into_par_iter()
        .map(|i| {
            let mut rng = crate::rng::stream(seed, i as u64);
            let x = Vector::from_fn(n, |j, _| center[j] + half[j] * rng.random_range(-1.0..=1.0));
            let dir = crate::geometry::sample_sphere_random(n, 1, &mut rng).remove(0).into_vector();
            let y = &x + dir * pair_gap;
            let diff = dsys.step_jacobian(k, &x)? - dsys.step_jacobian(k, &y)?;
            Ok(diff.singular_values().max() / pair_gap)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}
