use rayon::prelude::*;

use super::ocp::{influence_start, tightened_constraints, OcpSpec, TightenedConstraints, CONTROL_FD_STEP};
use super::qp::{solve_qp, QpProblem, QpSettings, QpStatus};
use crate::error::{Error, Result};
use crate::geometry::{Matrix, Vector};
use crate::reach::{rk4_integrate, TimeGrid};
use crate::systems::System;

/// Weight of the constraint violation in the step-acceptance merit.
const VIOLATION_WEIGHT: f64 = 1e4;
/// Trust-region halvings tried before a step is taken regardless.
const MAX_BACKTRACKS: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct ScpConfig {
    pub max_iter: usize,
    /// Bound on `‖δū‖_∞` per iteration.
    pub trust_region: f64,
    /// Converged once `‖δū‖_∞ < tol`.
    pub tol: f64,
    /// Interior offset of every linearized row, absorbing QP round-off.
    pub backoff: f64,
    pub qp: QpSettings,
}

impl Default for ScpConfig {
    fn default() -> Self {
        ScpConfig {
            max_iter: 15,
            trust_region: 0.05,
            tol: 1e-4,
            backoff: 1e-6,
            qp: QpSettings::default(),
        }
    }
}

impl ScpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || !(self.trust_region > 0.0) || !(self.tol > 0.0) || !(self.qp.eps_abs > 0.0) || !(self.backoff >= 0.0) {
            return Err(Error::Config("SCP settings must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScpStatus {
    Converged,
    MaxIterations,
    InfeasibleSubproblem,
}

/// State after one SCP iteration.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ScpIterate {
    pub objective: f64,
    /// Largest violation of the tightened constraints.
    pub violation: f64,
    /// `‖ū_{i+1} − ū_i‖_∞`.
    pub step: f64,
    pub qp_iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScpResult {
    /// Node-major `ū`, `3K` entries.
    pub ubar: Vec<f64>,
    pub trace: Vec<ScpIterate>,
    pub status: ScpStatus,
    /// Violation at the returned `ū`.
    pub max_violation: f64,
    pub constraints: TightenedConstraints,
}

impl ScpResult {
    pub fn objective(&self) -> f64 {
        self.trace.last().expect("trace is non-empty").objective
    }
}

/// Nominal node states `x(t_k)`, `k = 0..K`, and their sensitivities
/// `S_k = ∂x(t_k)/∂ū` (7 × 3K).
fn cost_linearization(spec: &OcpSpec, x0: &Vector, flat: &[f64]) -> Result<(Vec<Vector>, Vec<Matrix>)> {
    let fine = spec.nominal_fine(x0, flat)?;
    let grid = spec.fine_grid();
    let kk = spec.horizon_steps;
    let n_u = spec.control_len();
    let columns: Vec<Vec<Vector>> = (0..n_u)
        .into_par_iter()
        .map(|c| {
            let mut pert = flat.to_vec();
            pert[c] += CONTROL_FD_STEP;
            let sys = spec.full_system(spec.control_signal(&pert)?)?;
            let start = influence_start(spec, c / 3);
            let sub = TimeGrid {
                t0: grid.time(start),
                tf: grid.tf,
                steps: grid.steps - start,
            };
            let xs = rk4_integrate(&sub, fine[start].clone(), |t, x| Ok(sys.drift(t, x)))?;
            Ok((0..=kk)
                .map(|k| {
                    let idx = k * spec.substeps;
                    if idx <= start {
                        Vector::zeros(7)
                    } else {
                        (&xs[idx - start] - &fine[idx]) / CONTROL_FD_STEP
                    }
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let nodes: Vec<Vector> = (0..=kk).map(|k| fine[k * spec.substeps].clone()).collect();
    let sens = (0..=kk)
        .map(|k| Matrix::from_fn(7, n_u, |r, c| columns[c][k][r]))
        .collect();
    Ok((nodes, sens))
}

/// Gauss–Newton model of the cost in `δū`: `½δᵀPδ + qᵀδ`.
fn cost_model(spec: &OcpSpec, flat: &[f64], nodes: &[Vector], sens: &[Matrix]) -> (Matrix, Vector) {
    let n_u = spec.control_len();
    let mut p = Matrix::zeros(n_u, n_u);
    let mut q = Vector::zeros(n_u);
    for k in 1..=spec.horizon_steps {
        let qs = &spec.state_weight * &sens[k];
        p += sens[k].transpose() * &qs;
        q += qs.transpose() * (&nodes[k] - &spec.reference);
    }
    for j in 0..spec.horizon_steps {
        let u = Vector::from_column_slice(&flat[3 * j..3 * j + 3]);
        let ru = &spec.control_weight * u;
        for a in 0..3 {
            q[3 * j + a] += ru[a];
            for b in 0..3 {
                p[(3 * j + a, 3 * j + b)] += spec.control_weight[(a, b)];
            }
        }
    }
    let scale = 2.0 * spec.dt;
    (p * scale, q * scale)
}

/// Convex subproblem: linearized constraint rows that can become active
/// within the trust region, plus the trust-region box.
///
/// The elastic form appends one variable `t ≥ 0` that relaxes every kept row
/// by `t` at cost `10⁴·t`, the `ℓ∞` penalty of the merit function. It is
/// always feasible.
fn subproblem(p: &Matrix, q: &Vector, cons: &TightenedConstraints, radius: f64, backoff: f64, elastic: bool) -> Result<QpProblem> {
    let jac = cons.jacobian.as_ref().expect("linearization carries a Jacobian");
    let n_u = q.len();
    let mut kept = Vec::new();
    for (r, row) in cons.rows.iter().enumerate() {
        let reach = jac.row(r).iter().map(|v| v.abs()).sum::<f64>() * radius;
        let (up, down) = row.margins();
        if up <= reach || down <= reach {
            kept.push(r);
        }
    }
    let n = n_u + usize::from(elastic);
    let per_row = if elastic { 2 } else { 1 };
    let m = per_row * kept.len() + n;
    let mut a = Matrix::zeros(m, n);
    let mut l = Vector::from_element(m, f64::NEG_INFINITY);
    let mut u = Vector::from_element(m, f64::INFINITY);
    for (i, &r) in kept.iter().enumerate() {
        let row = &cons.rows[r];
        let (lo, hi) = (row.lower + backoff - row.value, row.upper - backoff - row.value);
        if elastic {
            // J δ + t ≥ lo and J δ − t ≤ hi.
            a.view_mut((2 * i, 0), (1, n_u)).copy_from(&jac.row(r));
            a[(2 * i, n_u)] = 1.0;
            l[2 * i] = lo;
            a.view_mut((2 * i + 1, 0), (1, n_u)).copy_from(&jac.row(r));
            a[(2 * i + 1, n_u)] = -1.0;
            u[2 * i + 1] = hi;
        } else {
            a.view_mut((i, 0), (1, n_u)).copy_from(&jac.row(r));
            l[i] = lo;
            u[i] = hi;
        }
    }
    let base = per_row * kept.len();
    for j in 0..n_u {
        a[(base + j, j)] = 1.0;
        l[base + j] = -radius;
        u[base + j] = radius;
    }
    let mut pp = Matrix::zeros(n, n);
    pp.view_mut((0, 0), (n_u, n_u)).copy_from(p);
    let mut qq = Vector::zeros(n);
    qq.rows_mut(0, n_u).copy_from(q);
    if elastic {
        a[(base + n_u, n_u)] = 1.0;
        l[base + n_u] = 0.0;
        qq[n_u] = VIOLATION_WEIGHT;
    }
    QpProblem::new(pp, qq, a, l, u)
}

fn merit(objective: f64, violation: f64) -> f64 {
    objective + VIOLATION_WEIGHT * violation
}

/// Sequential convex programming on the robust OCP from `x0`, starting at
/// `init` (node-major `ū`).
///
/// Each iteration linearizes the nominal dynamics and the tightened
/// constraints about the incumbent and solves the resulting QP in `δū`. A
/// step that raises `J + 10⁴·violation` is retried with half the trust
/// region, up to five times, and later iterations keep the reduced region.
/// When the linearized constraints are infeasible within the region, the
/// elastic subproblem minimizes the model cost plus `10⁴` times the largest
/// linearized violation instead.
pub fn scp_solve(spec: &OcpSpec, x0: &Vector, init: &[f64], cfg: &ScpConfig) -> Result<ScpResult> {
    spec.validate()?;
    cfg.validate()?;
    if x0.len() != 7 {
        return Err(Error::Config(format!("spacecraft state has 7 entries, got {}", x0.len())));
    }
    if init.len() != spec.control_len() || init.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("initial guess needs {} finite entries", spec.control_len())));
    }
    let mut ubar = init.to_vec();
    let mut trace = Vec::with_capacity(cfg.max_iter);
    let mut status = ScpStatus::MaxIterations;
    let mut cons = tightened_constraints(spec, &ubar, x0, true)?;
    let mut objective = spec.objective(x0, &ubar)?;
    // Radii shrunk by backtracking are never re-expanded.
    let mut radius_cap = cfg.trust_region;
    for _ in 0..cfg.max_iter {
        if cons.jacobian.is_none() {
            cons = tightened_constraints(spec, &ubar, x0, true)?;
        }
        let (nodes, sens) = cost_linearization(spec, x0, &ubar)?;
        let (p, q) = cost_model(spec, &ubar, &nodes, &sens);
        let current = merit(objective, cons.max_violation());
        let n_u = q.len();
        let mut radius = radius_cap;
        let mut accepted = None;
        let mut qp_iterations = 0;
        let mut elastic = false;
        for attempt in 0..=MAX_BACKTRACKS {
            let mut sol = solve_qp(&subproblem(&p, &q, &cons, radius, cfg.backoff, elastic)?, &cfg.qp)?;
            qp_iterations += sol.iterations;
            if sol.status == QpStatus::PrimalInfeasible && !elastic {
                elastic = true;
                sol = solve_qp(&subproblem(&p, &q, &cons, radius, cfg.backoff, true)?, &cfg.qp)?;
                qp_iterations += sol.iterations;
            }
            match sol.status {
                QpStatus::PrimalInfeasible | QpStatus::DualInfeasible => break,
                QpStatus::Solved | QpStatus::MaxIterations => {}
            }
            let delta: Vec<f64> = sol.x.iter().take(n_u).map(|v| v.clamp(-radius, radius)).collect();
            let trial: Vec<f64> = ubar.iter().zip(&delta).map(|(u, d)| u + d).collect();
            let trial_cons = tightened_constraints(spec, &trial, x0, false)?;
            let trial_obj = spec.objective(x0, &trial)?;
            let step = delta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let improves = merit(trial_obj, trial_cons.max_violation()) <= current + 1e-12 * current.abs();
            if improves || attempt == MAX_BACKTRACKS || step < cfg.tol {
                accepted = Some((trial, trial_cons, trial_obj, step));
                break;
            }
            radius *= 0.5;
        }
        let Some((trial, trial_cons, trial_obj, step)) = accepted else {
            status = ScpStatus::InfeasibleSubproblem;
            trace.push(ScpIterate {
                objective,
                violation: cons.max_violation(),
                step: 0.0,
                qp_iterations,
            });
            break;
        };
        radius_cap = radius;
        ubar = trial;
        cons = trial_cons;
        objective = trial_obj;
        trace.push(ScpIterate {
            objective,
            violation: cons.max_violation(),
            step,
            qp_iterations,
        });
        if step < cfg.tol {
            status = ScpStatus::Converged;
            break;
        }
    }
    Ok(ScpResult {
        max_violation: cons.max_violation(),
        ubar,
        trace,
        status,
        constraints: cons,
    })
}
