use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{covering_radius, Direction, Matrix, SmoothConvexSet, Vector};
use crate::reach::{
    error_bounds, extremal_trajectory, integrate_costate, lipschitz_estimates, rk4_integrate, InitialSet, TimeGrid,
};
use crate::systems::{ControlSignal, SpacecraftFull, SpacecraftOmega, System, SPACECRAFT_INERTIA};

/// Forward-difference step on `ū` entries.
pub(crate) const CONTROL_FD_STEP: f64 = 1e-6;

/// Robust OCP data. States are `(q, ω) ∈ R⁷`, controls `ū ∈ R^{3K}`
/// flattened node-major.
#[derive(Clone, Debug, PartialEq)]
pub struct OcpSpec {
    pub horizon_steps: usize,
    pub dt: f64,
    /// RK4 steps per `Δt`.
    pub substeps: usize,
    pub state_weight: Matrix,
    pub control_weight: Matrix,
    pub reference: Vector,
    pub omega_max: f64,
    pub u_max: f64,
    pub directions: Vec<Direction>,
    /// `ε_k` at the nodes `k = 0..K`.
    pub tightening: Vec<f64>,
    pub inertia: [f64; 3],
    pub gain: Matrix,
    pub disturbance: SmoothConvexSet,
}

impl OcpSpec {
    /// `T = 10`, `Δt = 1`, `Q = 10·I₇`, `R = I₃`, `x_r = (1,0,…,0)`, limits
    /// 0.1, `J = diag(5,2,1)`, `K = −J`, `W = B(0, 10⁻²)`, no tightening.
    pub fn benchmark(directions: Vec<Direction>) -> Self {
        let horizon_steps = 10;
        let mut reference = Vector::zeros(7);
        reference[0] = 1.0;
        OcpSpec {
            horizon_steps,
            dt: 1.0,
            substeps: 5,
            state_weight: Matrix::identity(7, 7) * 10.0,
            control_weight: Matrix::identity(3, 3),
            reference,
            omega_max: 0.1,
            u_max: 0.1,
            directions,
            tightening: vec![0.0; horizon_steps + 1],
            inertia: SPACECRAFT_INERTIA,
            gain: -Matrix::from_diagonal(&Vector::from_column_slice(&SPACECRAFT_INERTIA)),
            disturbance: SmoothConvexSet::ball(Vector::zeros(3), 1e-2).expect("positive radius"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon_steps == 0 || self.substeps == 0 || !(self.dt > 0.0) {
            return Err(Error::Config("OCP needs K >= 1, substeps >= 1 and dt > 0".into()));
        }
        if self.tightening.len() != self.horizon_steps + 1 {
            return Err(Error::Config(format!(
                "tightening needs {} node values, got {}",
                self.horizon_steps + 1,
                self.tightening.len()
            )));
        }
        let emax = self.tightening.iter().fold(0.0f64, |m, e| m.max(*e));
        if self.tightening.iter().any(|e| !(*e >= 0.0)) || !(self.omega_max > emax && self.u_max > emax) {
            return Err(Error::Config("tightened limits are empty".into()));
        }
        if self.state_weight.shape() != (7, 7) || self.control_weight.shape() != (3, 3) || self.reference.len() != 7 {
            return Err(Error::Config("OCP weights must be 7x7 and 3x3 with a 7-D reference".into()));
        }
        if self.disturbance.dim() != 3 {
            return Err(Error::Config("spacecraft disturbance set must be 3-D".into()));
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.horizon_steps as f64
    }

    pub fn control_len(&self) -> usize {
        3 * self.horizon_steps
    }

    /// Integration grid of the horizon, `K·substeps` RK4 steps.
    pub fn fine_grid(&self) -> TimeGrid {
        TimeGrid {
            t0: 0.0,
            tf: self.horizon(),
            steps: self.horizon_steps * self.substeps,
        }
    }

    pub fn control_signal(&self, flat: &[f64]) -> Result<ControlSignal> {
        if flat.len() != self.control_len() {
            return Err(Error::Config(format!("expected {} control entries, got {}", self.control_len(), flat.len())));
        }
        ControlSignal::from_flat(0.0, self.dt, 3, flat)
    }

    pub fn omega_system(&self, control: ControlSignal) -> Result<SpacecraftOmega> {
        SpacecraftOmega::new(self.inertia, self.gain.clone(), control)
    }

    pub fn full_system(&self, control: ControlSignal) -> Result<SpacecraftFull> {
        SpacecraftFull::new(self.inertia, self.gain.clone(), control)
    }

    /// `ū(t_k)` for `k = 0..K`; the last node value is held.
    pub(crate) fn node_control(&self, flat: &[f64], k: usize) -> [f64; 3] {
        let j = k.min(self.horizon_steps - 1);
        [flat[3 * j], flat[3 * j + 1], flat[3 * j + 2]]
    }

    /// Undisturbed full-state trajectory on the fine grid.
    pub fn nominal_fine(&self, x0: &Vector, flat: &[f64]) -> Result<Vec<Vector>> {
        let sys = self.full_system(self.control_signal(flat)?)?;
        rk4_integrate(&self.fine_grid(), x0.clone(), |t, x| Ok(sys.drift(t, x)))
    }

    /// `Δt Σ_{k=1..K} (x_k − x_r)ᵀQ(x_k − x_r) + Δt Σ_{k=0..K−1} ū_kᵀRū_k`.
    pub fn objective_from_nodes(&self, nodes: &[Vector], flat: &[f64]) -> f64 {
        let mut total = 0.0;
        for k in 1..=self.horizon_steps {
            let e = &nodes[k * self.substeps] - &self.reference;
            total += e.dot(&(&self.state_weight * &e));
        }
        for u in flat.chunks(3) {
            let u = Vector::from_column_slice(u);
            total += u.dot(&(&self.control_weight * &u));
        }
        self.dt * total
    }

    pub fn objective(&self, x0: &Vector, flat: &[f64]) -> Result<f64> {
        Ok(self.objective_from_nodes(&self.nominal_fine(x0, flat)?, flat))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    Omega,
    Control,
}

/// One two-sided row `lower ≤ value ≤ upper`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstraintRow {
    pub direction: usize,
    pub node: usize,
    pub component: usize,
    pub kind: ConstraintKind,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ConstraintRow {
    /// `(upper − value, value − lower)`; both nonnegative when satisfied.
    pub fn margins(&self) -> (f64, f64) {
        (self.upper - self.value, self.value - self.lower)
    }

    pub fn violation(&self) -> f64 {
        (self.value - self.upper).max(self.lower - self.value).max(0.0)
    }
}

/// Rows of the tightened constraints at `ū`, the extremal `ω^i` at the
/// nodes, and optionally the Jacobian of the row values with respect to `ū`.
#[derive(Clone, Debug, PartialEq)]
pub struct TightenedConstraints {
    pub rows: Vec<ConstraintRow>,
    pub jacobian: Option<Matrix>,
    /// `omega[i][k]`: direction `i` at node `k`.
    pub omega: Vec<Vec<Vector>>,
}

impl TightenedConstraints {
    pub fn max_violation(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.violation()))
    }
}

/// Fine-grid states (and costates, empty without directions) of one fan
/// member.
pub(crate) struct FanMember {
    x: Vec<Vector>,
    p: Vec<Vector>,
}

pub(crate) fn omega_fan(spec: &OcpSpec, x0: &Vector, flat: &[f64]) -> Result<Vec<FanMember>> {
    let sys = spec.omega_system(spec.control_signal(flat)?)?;
    let grid = spec.fine_grid();
    let w0 = x0.rows(4, 3).into_owned();
    if spec.directions.is_empty() {
        let x = rk4_integrate(&grid, w0, |t, w| Ok(sys.drift(t, w)))?;
        return Ok(vec![FanMember { x, p: Vec::new() }]);
    }
    let x0set = InitialSet::Singleton(w0);
    spec.directions
        .par_iter()
        .enumerate()
        .map(|(index, d)| {
            extremal_trajectory(&sys, &spec.disturbance, &x0set, d, &grid)
                .map(|tr| FanMember { x: tr.x, p: tr.p })
                .map_err(|e| Error::Direction {
                    index,
                    source: Box::new(e),
                })
        })
        .collect()
}

fn restart_grid(grid: &TimeGrid, start: usize) -> TimeGrid {
    TimeGrid {
        t0: grid.time(start),
        tf: grid.tf,
        steps: grid.steps - start,
    }
}

/// Fine-grid index from which perturbing control node `j` changes the
/// trajectory (`ū_j` acts on `[(j−1)Δt, (j+1)Δt]`).
pub(crate) fn influence_start(spec: &OcpSpec, j: usize) -> usize {
    j.saturating_sub(1) * spec.substeps
}

fn build_rows(spec: &OcpSpec, flat: &[f64], omega: &[Vec<Vector>]) -> Vec<ConstraintRow> {
    let mut rows = Vec::new();
    for (i, nodes) in omega.iter().enumerate() {
        for k in 1..=spec.horizon_steps {
            let e = spec.tightening[k];
            for j in 0..3 {
                rows.push(ConstraintRow {
                    direction: i,
                    node: k,
                    component: j,
                    kind: ConstraintKind::Omega,
                    value: nodes[k][j],
                    lower: -spec.omega_max + e,
                    upper: spec.omega_max - e,
                });
            }
        }
        for k in 0..=spec.horizon_steps {
            let e = spec.tightening[k];
            let u = Vector::from_column_slice(&spec.node_control(flat, k)) + &spec.gain * &nodes[k];
            for j in 0..3 {
                rows.push(ConstraintRow {
                    direction: i,
                    node: k,
                    component: j,
                    kind: ConstraintKind::Control,
                    value: u[j],
                    lower: -spec.u_max + e,
                    upper: spec.u_max - e,
                });
            }
        }
    }
    rows
}

/// Row values are ordered by direction, then ω rows (nodes `1..K`), then
/// control rows (nodes `0..K`), component fastest. Without directions the
/// nominal ω trajectory stands in for the fan.
pub fn tightened_constraints(
    spec: &OcpSpec,
    flat: &[f64],
    x0: &Vector,
    with_jacobian: bool,
) -> Result<TightenedConstraints> {
    spec.validate()?;
    let fan = omega_fan(spec, x0, flat)?;
    let coarse = |xs: &[Vector]| -> Vec<Vector> {
        (0..=spec.horizon_steps).map(|k| xs[k * spec.substeps].clone()).collect()
    };
    let omega: Vec<Vec<Vector>> = fan.iter().map(|m| coarse(&m.x)).collect();
    let rows = build_rows(spec, flat, &omega);
    let jacobian = if with_jacobian {
        Some(constraint_jacobian(spec, flat, &fan, &omega, rows.len())?)
    } else {
        None
    };
    Ok(TightenedConstraints { rows, jacobian, omega })
}

fn constraint_jacobian(
    spec: &OcpSpec,
    flat: &[f64],
    fan: &[FanMember],
    omega: &[Vec<Vector>],
    row_count: usize,
) -> Result<Matrix> {
    let grid = spec.fine_grid();
    let n_u = spec.control_len();
    let kk = spec.horizon_steps;
    // Column c: d ω^i(t_k) / d ū_c for every direction and node.
    let columns: Vec<Vec<Vec<Vector>>> = (0..n_u)
        .into_par_iter()
        .map(|c| {
            let mut pert = flat.to_vec();
            pert[c] += CONTROL_FD_STEP;
            let sys = spec.omega_system(spec.control_signal(&pert)?)?;
            let start = influence_start(spec, c / 3);
            let sub = restart_grid(&grid, start);
            fan.iter()
                .zip(omega.iter())
                .map(|(member, base)| {
                    let xs = if member.p.is_empty() {
                        rk4_integrate(&sub, member.x[start].clone(), |t, w| Ok(sys.drift(t, w)))?
                    } else {
                        integrate_costate(&sys, &spec.disturbance, member.x[start].clone(), member.p[start].clone(), &sub)?.0
                    };
                    Ok((0..=kk)
                        .map(|k| {
                            let idx = k * spec.substeps;
                            if idx <= start {
                                Vector::zeros(3)
                            } else {
                                (&xs[idx - start] - &base[k]) / CONTROL_FD_STEP
                            }
                        })
                        .collect())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut jac = Matrix::zeros(row_count, n_u);
    for c in 0..n_u {
        let (node_c, comp_c) = (c / 3, c % 3);
        let mut r = 0;
        for dw in columns[c].iter() {
            for dwk in dw.iter().take(kk + 1).skip(1) {
                for j in 0..3 {
                    jac[(r, c)] = dwk[j];
                    r += 1;
                }
            }
            for (k, dwk) in dw.iter().enumerate() {
                let kdw = &spec.gain * dwk;
                for j in 0..3 {
                    let direct = if k.min(kk - 1) == node_c && j == comp_c { 1.0 } else { 0.0 };
                    jac[(r, c)] = direct + kdw[j];
                    r += 1;
                }
            }
        }
    }
    Ok(jac)
}

/// Quadratic-bound tightening of an OCP and the sampled constants behind it.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Tightening {
    /// `ε_k` at the nodes `0..K`.
    pub eps: Vec<f64>,
    pub lbar: Vec<f64>,
    pub hbar: Vec<f64>,
    /// Covering radius of the direction set.
    pub delta: f64,
    /// `(max − min)/max` of `L̄_T` across the control probes.
    pub lbar_variation: f64,
}

/// `ε_k = (L̄ + H̄)δ²/2` with `L̄`, `H̄` maximized over `control_probes`
/// random `(ū, ω(0))` pairs (`ū` uniform in the control box, `ω(0)` uniform
/// in the `ω` box). Every pair reuses the same `probes` direction probes, so
/// the reported variation reflects `(ū, ω(0))` and not probe sampling.
pub fn compute_tightening(
    spec: &OcpSpec,
    control_probes: usize,
    probes: usize,
    covering_probes: usize,
    seed: u64,
) -> Result<Tightening> {
    if spec.directions.is_empty() {
        return Err(Error::Config("tightening needs directions".into()));
    }
    let grid = spec.fine_grid();
    let mut per_probe = Vec::with_capacity(control_probes.max(1));
    for j in 0..control_probes.max(1) {
        let mut rng = crate::rng::stream(seed, j as u64);
        let flat: Vec<f64> = (0..spec.control_len())
            .map(|_| spec.u_max * rng.random_range(-1.0..=1.0))
            .collect();
        let w0 = Vector::from_fn(3, |_, _| spec.omega_max * rng.random_range(-1.0..=1.0));
        let sys = spec.omega_system(spec.control_signal(&flat)?)?;
        let est = lipschitz_estimates(
            &sys,
            &spec.disturbance,
            &InitialSet::Singleton(w0),
            &grid,
            probes.max(2),
            crate::rng::mix64(seed),
        )?;
        per_probe.push(est);
    }
    let merged = per_probe[1..].iter().fold(per_probe[0].clone(), |acc, e| acc.max(e));
    let finals: Vec<f64> = per_probe.iter().map(|e| *e.lbar.last().expect("nodes")).collect();
    let hi = finals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = finals.iter().cloned().fold(f64::INFINITY, f64::min);
    let delta = covering_radius(&spec.directions, covering_probes, seed)?;
    let bounds = error_bounds(&merged.lbar, &merged.hbar, delta);
    let eps = (0..=spec.horizon_steps).map(|k| bounds.quadratic[k * spec.substeps]).collect();
    Ok(Tightening {
        eps,
        lbar: merged.lbar,
        hbar: merged.hbar,
        delta,
        lbar_variation: if hi > 0.0 { (hi - lo) / hi } else { 0.0 },
    })
}
