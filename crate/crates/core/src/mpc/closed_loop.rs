use std::time::Instant;

use rand::Rng;

use super::ocp::OcpSpec;
use super::scp::{scp_solve, ScpConfig, ScpIterate, ScpStatus};
use crate::error::{Error, Result};
use crate::geometry::{sample_sphere_random, Vector};
use crate::reach::{rk4_integrate, TimeGrid};
use crate::systems::System;

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoopConfig {
    /// MPC steps of length `Δt`.
    pub steps: usize,
    /// Settings of the first solve, from `ū = 0`.
    pub cold: ScpConfig,
    /// Settings of every later solve, warm-started from the shifted plan.
    pub warm: ScpConfig,
    pub seed: u64,
}

impl ClosedLoopConfig {
    /// 30 steps, cold solves of up to 15 iterations and single-iteration warm
    /// solves.
    pub fn benchmark(seed: u64) -> Self {
        let cold = ScpConfig::default();
        let warm = ScpConfig {
            max_iter: 1,
            ..ScpConfig::default()
        };
        ClosedLoopConfig {
            steps: 30,
            cold,
            warm,
            seed,
        }
    }
}

/// Outcome of the OCP solve at one MPC step.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SolveRecord {
    pub step: usize,
    /// `None` when the solver failed outright; the shifted plan was applied.
    pub status: Option<ScpStatus>,
    pub trace: Vec<ScpIterate>,
    pub max_violation: f64,
    pub seconds: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedLoopTrace {
    /// `x(kΔt)`, `k = 0..steps`.
    pub states: Vec<Vector>,
    /// Applied `u(kΔt) = ū(kΔt) + Kω(kΔt)`, `k = 0..steps−1`.
    pub controls: Vec<Vector>,
    pub solves: Vec<SolveRecord>,
    /// Node entries with `|ω_j| > ω_max` or `|u_j| > u_max`.
    pub violations: usize,
    /// Largest `|ω_j|` and `|u_j|` over every RK4 substep.
    pub peak_omega: f64,
    pub peak_control: f64,
}

impl ClosedLoopTrace {
    pub fn final_state(&self) -> &Vector {
        self.states.last().expect("states are non-empty")
    }
}

/// `q(0)` a rotation by at most 60° about a uniform axis, `ω(0)` uniform in
/// `‖ω‖_∞ ≤ 0.05`.
pub fn sample_initial_state<R: Rng + ?Sized>(rng: &mut R) -> Vector {
    let axis = sample_sphere_random(3, 1, rng).remove(0).into_vector();
    let angle = rng.random_range(0.0..=60f64.to_radians());
    let (s, c) = (0.5 * angle).sin_cos();
    let mut x = Vector::zeros(7);
    x[0] = c;
    for j in 0..3 {
        x[1 + j] = s * axis[j];
        x[4 + j] = rng.random_range(-0.05..=0.05);
    }
    x
}

fn shifted(spec: &OcpSpec, flat: &[f64]) -> Vec<f64> {
    let mut out = flat[3..].to_vec();
    out.extend_from_slice(&flat[3 * (spec.horizon_steps - 1)..]);
    out
}

/// Receding-horizon robust MPC from `x0`: solve, apply `ū(t) + Kω(t)` over
/// one `Δt` under a disturbance drawn uniformly from `W` and held per RK4
/// substep, shift, repeat.
pub fn mpc_closed_loop(spec: &OcpSpec, x0: &Vector, cfg: &ClosedLoopConfig) -> Result<ClosedLoopTrace> {
    spec.validate()?;
    if cfg.steps == 0 {
        return Err(Error::Config("closed loop needs at least one step".into()));
    }
    if x0.len() != 7 {
        return Err(Error::Config(format!("spacecraft state has 7 entries, got {}", x0.len())));
    }
    let mut rng = crate::rng::seeded(cfg.seed);
    let mut x = x0.clone();
    let mut plan = vec![0.0; spec.control_len()];
    let mut trace = ClosedLoopTrace {
        states: vec![x.clone()],
        controls: Vec::with_capacity(cfg.steps),
        solves: Vec::with_capacity(cfg.steps),
        violations: 0,
        peak_omega: 0.0,
        peak_control: 0.0,
    };
    let sub = TimeGrid {
        t0: 0.0,
        tf: spec.dt,
        steps: spec.substeps,
    };
    let h = sub.step();
    for k in 0..cfg.steps {
        let settings = if k == 0 { &cfg.cold } else { &cfg.warm };
        let start = Instant::now();
        let record = match scp_solve(spec, &x, &plan, settings) {
            Ok(res) => {
                if res.status != ScpStatus::InfeasibleSubproblem || k == 0 {
                    plan = res.ubar;
                }
                SolveRecord {
                    step: k,
                    status: Some(res.status),
                    max_violation: res.max_violation,
                    trace: res.trace,
                    seconds: start.elapsed().as_secs_f64(),
                    error: None,
                }
            }
            Err(e) => SolveRecord {
                step: k,
                status: None,
                trace: Vec::new(),
                max_violation: f64::NAN,
                seconds: start.elapsed().as_secs_f64(),
                error: Some(e.to_string()),
            },
        };
        trace.solves.push(record);

        let sys = spec.full_system(spec.control_signal(&plan)?)?;
        let applied = |t: f64, state: &Vector| {
            sys.control().value(t) + &spec.gain * state.rows(4, 3).into_owned()
        };
        let u0 = applied(0.0, &x);
        trace.controls.push(u0.clone());
        let check = |v: &Vector, limit: f64| v.iter().filter(|c| c.abs() > limit).count();
        trace.violations += check(&x.rows(4, 3).into_owned(), spec.omega_max) + check(&u0, spec.u_max);
        for s in 0..spec.substeps {
            let w = spec.disturbance.sample_uniform(&mut rng);
            let g = sys.input_matrix(0.0, &x) * &w;
            let one = TimeGrid {
                t0: sub.time(s),
                tf: sub.time(s) + h,
                steps: 1,
            };
            x = rk4_integrate(&one, x, |t, y| Ok(sys.drift(t, y) + &g))?.pop().expect("two nodes");
            let omega = x.rows(4, 3).into_owned();
            trace.peak_omega = trace.peak_omega.max(omega.amax());
            trace.peak_control = trace.peak_control.max(applied(one.tf, &x).amax());
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { node: k + 1, t: (k + 1) as f64 * spec.dt });
        }
        trace.states.push(x.clone());
        plan = shifted(spec, &plan);
    }
    let last = &trace.states[cfg.steps];
    trace.violations += last.rows(4, 3).iter().filter(|c| c.abs() > spec.omega_max).count();
    Ok(trace)
}
