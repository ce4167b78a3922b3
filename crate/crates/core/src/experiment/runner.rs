use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::*;
use super::emit::{format_float, OutputDir};
use super::manifest::{digest_outputs, sha256_hex, PhaseClock, RunManifest};
use crate::baselines::{
    check_containment, check_tube, estimate_step_hessian_bound, lipschitz_tube, monte_carlo_discrete,
    monte_carlo_rollouts, randup_hulls, Containment, DiscreteSystem, DisturbanceMode,
};
use crate::error::{Error, Result};
use crate::geometry::{
    covering_radius, distance_to_hull, hausdorff, lift_set, sample_sphere, sample_sphere_random, Direction, LambdaMode,
    Matrix, SmoothConvexSet, SphereScheme, Vector, DEFAULT_HULL_TOL,
};
use crate::mpc::{compute_tightening, mpc_closed_loop, sample_initial_state, ClosedLoopConfig, ClosedLoopTrace, OcpSpec, ScpConfig};
use crate::reach::{
    error_bounds, estimate_hulls, integrate_costate, initial_pair, lipschitz_estimates, HullEstimate, InitialSet, TimeGrid,
};
use crate::relax::{complete_basis, estimate_hulls_fullrank_relax, estimate_hulls_rect, EpsExtension, RectSpec};
use crate::systems::{
    jacobian_check, AttractionRepulsion, ControlSignal, Dubins, LinearSystem, NeuralLoop, SpacecraftFull, SpacecraftOmega,
    System,
};

/// Tolerance of the under ⊆ over check of the λ relaxation.
const SANDWICH_TOL: f64 = 1e-9;
/// Largest accepted relative drift of `L̄_T` across control probes.
const LBAR_VARIATION_LIMIT: f64 = 0.5;
/// Final `‖ω‖_∞` every closed-loop run must reach.
const FINAL_OMEGA_LIMIT: f64 = 0.02;
/// Share of multi-iteration SCP solves whose step trace must be
/// non-increasing after the second iteration.
const SCP_MONOTONE_SHARE: f64 = 0.9;
/// Step changes below the QP tolerance are not resolved by the solver.
const STEP_RESOLUTION: f64 = 1e-6;

/// Command-line overrides of a config.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seeds: Option<usize>,
    /// Recorded in the manifest; the pool itself is configured by the caller.
    pub threads: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub experiment: String,
    pub output_dir: PathBuf,
    /// The `results` object of `metrics.json`.
    pub metrics: Value,
    /// Invariant violations; non-empty means the run failed.
    pub failures: Vec<String>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Ctx {
    out: OutputDir,
    clock: PhaseClock,
    failures: Vec<String>,
    base_dir: PathBuf,
}

/// Loads, runs and records the experiment in `config_path`.
pub fn run_file(config_path: &Path, opts: &RunOptions) -> Result<RunReport> {
    let bytes = std::fs::read(config_path).map_err(|e| Error::io(config_path, e))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| Error::Parse {
        path: config_path.to_path_buf(),
        message: e.to_string(),
    })?;
    let cfg = ExperimentConfig::from_json(&text, config_path)?;
    let base_dir = config_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let echo: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: config_path.to_path_buf(),
        message: e.to_string(),
    })?;
    run_config(&cfg, &base_dir, &bytes, echo, opts)
}

fn extra_inputs(cfg: &ExperimentConfig, base_dir: &Path) -> Result<Vec<Vec<u8>>> {
    let mut paths = Vec::new();
    let mut visit = |s: &SystemConfig| {
        if let SystemConfig::NeuralLoop { policy: Some(p) } = s {
            paths.push(resolve(base_dir, p));
        }
    };
    match cfg {
        ExperimentConfig::Reach(c) => visit(&c.system),
        ExperimentConfig::Compare(c) => visit(&c.system),
        ExperimentConfig::NnLoop(c) => {
            if let Some(p) = &c.policy {
                paths.push(resolve(base_dir, p));
            }
        }
        _ => {}
    }
    paths
        .into_iter()
        .map(|p| std::fs::read(&p).map_err(|e| Error::io(&p, e)))
        .collect()
}

/// Runs a parsed config. `config_bytes` feed the input hash and `echo` is
/// copied into the manifest.
pub fn run_config(
    cfg: &ExperimentConfig,
    base_dir: &Path,
    config_bytes: &[u8],
    echo: Value,
    opts: &RunOptions,
) -> Result<RunReport> {
    let root = opts
        .out
        .clone()
        .or_else(|| cfg.output().map(|p| resolve(base_dir, p)))
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.id()));
    let inputs = extra_inputs(cfg, base_dir)?;
    let mut parts: Vec<&[u8]> = vec![config_bytes];
    parts.extend(inputs.iter().map(|v| v.as_slice()));
    let input_hash = sha256_hex(&parts);

    let mut ctx = Ctx {
        out: OutputDir::create(&root)?,
        clock: PhaseClock::default(),
        failures: Vec::new(),
        base_dir: base_dir.to_path_buf(),
    };
    let metrics = match cfg {
        ExperimentConfig::Reach(c) => run_reach(c, &mut ctx)?,
        ExperimentConfig::DubinsRect(c) => run_dubins_rect(c, &mut ctx)?,
        ExperimentConfig::DubinsLift(c) => run_dubins_lift(c, &mut ctx)?,
        ExperimentConfig::NnLoop(c) => run_nn_loop(c, &mut ctx)?,
        ExperimentConfig::SpacecraftMpc(c) => run_spacecraft_mpc(c, opts.seeds, &mut ctx)?,
        ExperimentConfig::Compare(c) => run_compare(c, &mut ctx)?,
        ExperimentConfig::Validate(c) => run_validate(c, &mut ctx)?,
    };
    ctx.out.write_json(
        "metrics.json",
        &json!({
            "experiment": cfg.id(),
            "seed": cfg.seed(),
            "passed": ctx.failures.is_empty(),
            "failures": ctx.failures,
            "results": metrics,
        }),
    )?;

    let outputs = digest_outputs(ctx.out.root(), ctx.out.written())?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: cfg.id().into(),
        config: echo,
        input_hash,
        threads: opts.threads,
        seeds: opts.seeds,
        phases: std::mem::take(&mut ctx.clock).into_phases(),
        outputs,
        failures: ctx.failures.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    ctx.out.write_atomic("manifest.json", &text)?;
    Ok(RunReport {
        experiment: cfg.id().into(),
        output_dir: root,
        metrics,
        failures: ctx.failures,
    })
}

fn emitted_nodes(nodes: usize, every: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = (0..nodes).step_by(every.max(1)).collect();
    if ks.last() != Some(&(nodes - 1)) {
        ks.push(nodes - 1);
    }
    ks
}

fn write_hulls(ctx: &mut Ctx, dir: &str, est: &HullEstimate, every: usize) -> Result<()> {
    for k in emitted_nodes(est.hulls.len(), every) {
        ctx.out.write_hull(dir, k, &est.hulls[k])?;
    }
    Ok(())
}

fn containment_json(c: &Containment, slack: f64) -> Value {
    json!({
        "checked": c.checked,
        "violations": c.violations,
        "max_excess": c.max_excess,
        "slack": slack,
    })
}

/// Directions for an `n`-dimensional problem: evenly spaced angles on the
/// circle, a Fibonacci lattice on `S²`, random otherwise.
fn default_directions(n: usize, count: usize, seed: u64) -> Result<Vec<Direction>> {
    let scheme = match n {
        2 => SphereScheme::UniformAngle,
        3 => SphereScheme::Fibonacci,
        _ => SphereScheme::Random { seed },
    };
    sample_sphere(n, count, scheme)
}

fn run_reach(c: &ReachConfig, ctx: &mut Ctx) -> Result<Value> {
    let sys = c.system.build(&ctx.base_dir)?;
    let wset = c.disturbance.build()?;
    let x0 = c.initial.build()?;
    let dirs = c.directions.build(sys.state_dim(), c.seed)?;
    let mut est = ctx.clock.time("hulls", || estimate_hulls(sys.as_ref(), &wset, &x0, &dirs, &c.grid))?;
    let mut bounds = Value::Null;
    if let Some(b) = c.bounds {
        let (est_l, delta) = ctx.clock.time("bounds", || {
            let l = lipschitz_estimates(sys.as_ref(), &wset, &x0, &c.grid, b.probes, c.seed)?;
            let delta = covering_radius(&dirs, b.covering_probes, c.seed)?;
            Ok((l, delta))
        })?;
        let eb = error_bounds(&est_l.lbar, &est_l.hbar, delta);
        est = est.with_padding(eb.quadratic.clone())?;
        bounds = json!({
            "delta": delta,
            "lbar": est_l.lbar,
            "hbar": est_l.hbar,
            "eps_naive": eb.naive,
            "eps_quad": eb.quadratic,
        });
    }
    let mut containment = Value::Null;
    if let Some(v) = c.validation {
        let report = ctx.clock.time("validation", || {
            let r = monte_carlo_rollouts(sys.as_ref(), &wset, &x0, v.rollouts, c.seed, &c.grid)?;
            check_containment(&est, &r, v.slack)
        })?;
        if report.violations > 0 {
            ctx.failures.push(format!(
                "{} of {} Monte Carlo states lie outside the padded hulls (max excess {:.3e})",
                report.violations, report.checked, report.max_excess
            ));
        }
        containment = containment_json(&report, v.slack);
    }
    write_hulls(ctx, ".", &est, c.emit_every)?;
    Ok(json!({
        "system": sys.label(),
        "directions": dirs.len(),
        "scheme": c.directions.scheme(c.seed).label(),
        "time": c.grid.times(),
        "vertices": est.hulls.iter().map(|h| h.len()).collect::<Vec<_>>(),
        "bounds": bounds,
        "containment": containment,
    }))
}

fn run_dubins_rect(c: &DubinsRectConfig, ctx: &mut Ctx) -> Result<Value> {
    let sys = Dubins::new(c.v, c.omega, Matrix::identity(3, 3))?;
    let spec = RectSpec::new(
        Vector::from_column_slice(&c.delta_w),
        Vector::from_column_slice(&c.x0_center),
        Vector::from_column_slice(&c.delta_x0),
    )?;
    let dirs = c.directions.build(3, c.seed)?;
    let mut per_lambda = Vec::new();
    let mut gaps = Vec::new();
    for &lambda in &c.lambdas {
        let (under, over) = ctx.clock.time(&format!("lambda {lambda}"), || {
            Ok((
                estimate_hulls_rect(&sys, &spec, lambda, LambdaMode::Under, &dirs, &c.grid)?,
                estimate_hulls_rect(&sys, &spec, lambda, LambdaMode::Over, &dirs, &c.grid)?,
            ))
        })?;
        let sandwich = ctx.clock.time(&format!("sandwich {lambda}"), || {
            Ok((0..under.hulls.len())
                .into_par_iter()
                .map(|k| {
                    under.hulls[k]
                        .points()
                        .iter()
                        .map(|p| distance_to_hull(p, &over.hulls[k], SANDWICH_TOL * 1e-3))
                        .fold(0.0, f64::max)
                })
                .reduce(|| 0.0, f64::max))
        })?;
        if sandwich > SANDWICH_TOL {
            ctx.failures.push(format!(
                "lambda {lambda}: an under-hull vertex lies {sandwich:.3e} outside the over-hull"
            ));
        }
        let gap = hausdorff(under.last(), over.last(), DEFAULT_HULL_TOL);
        gaps.push(gap);
        let dir = format!("lambda_{lambda}");
        write_hulls(ctx, &format!("{dir}/under"), &under, c.emit_every)?;
        write_hulls(ctx, &format!("{dir}/over"), &over, c.emit_every)?;
        per_lambda.push(json!({
            "lambda": lambda,
            "sandwich_max_distance": sandwich,
            "hausdorff_final": gap,
        }));
    }
    let sorted = c.lambdas.windows(2).all(|w| w[0] < w[1]);
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    Ok(json!({
        "time": c.grid.times(),
        "directions": dirs.len(),
        "lambdas": per_lambda,
        "hausdorff_strictly_decreasing": if sorted { Value::Bool(decreasing) } else { Value::Null },
    }))
}

fn run_dubins_lift(c: &DubinsLiftConfig, ctx: &mut Ctx) -> Result<Value> {
    let g = rows(&c.g, "g")?;
    let base = Dubins::new(c.v, c.omega, g.clone())?;
    let wset = c.disturbance.build()?;
    let x0 = c.initial.build()?;
    let extra = complete_basis(&g, c.seed)?;
    let dirs = c.directions.build(3, c.seed)?;
    let rollouts = match c.validation {
        Some(v) => Some(ctx.clock.time("monte carlo", || {
            monte_carlo_rollouts(&base, &wset, &x0, v.rollouts, c.seed, &c.grid)
        })?),
        None => None,
    };
    let mut hulls: Vec<HullEstimate> = Vec::new();
    let mut per_eps = Vec::new();
    for &eps in &c.epsilons {
        let ext = EpsExtension::new(base.clone(), extra.clone(), eps)?;
        ext.check_invertible(c.grid.t0, &x0.center(), &Vector::from_element(3, 10.0), 1000, c.seed)?;
        let est = ctx.clock.time(&format!("epsilon {eps}"), || {
            estimate_hulls_fullrank_relax(&ext, &wset, &x0, &dirs, &c.grid)
        })?;
        let mut containment = Value::Null;
        if let (Some(r), Some(v)) = (&rollouts, c.validation) {
            let report = check_containment(&est, r, v.slack)?;
            if report.violations > 0 {
                ctx.failures.push(format!(
                    "epsilon {eps}: {} Monte Carlo states outside the hulls (max excess {:.3e})",
                    report.violations, report.max_excess
                ));
            }
            containment = containment_json(&report, v.slack);
        }
        write_hulls(ctx, &format!("eps_{eps}"), &est, c.emit_every)?;
        per_eps.push(json!({
            "epsilon": eps,
            "containment": containment,
        }));
        hulls.push(est);
    }
    let gaps: Vec<f64> = hulls
        .windows(2)
        .map(|w| hausdorff(w[0].last(), w[1].last(), DEFAULT_HULL_TOL))
        .collect();
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(json!({
        "time": c.grid.times(),
        "directions": dirs.len(),
        "extra_columns": extra.column_iter().map(|col| col.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
        "epsilons": per_eps,
        "consecutive_hausdorff_final": gaps,
        "hausdorff_ratios": ratios,
    }))
}

/// RandUP over a step of `dt` matching the RK4 resolution of `grid`.
fn randup_discretization<'a>(sys: &'a dyn System, grid: &TimeGrid, dt: f64) -> Result<DiscreteSystem<'a>> {
    let steps = ((grid.tf - grid.t0) / dt).round() as usize;
    let substeps = (grid.steps / steps.max(1)).max(1);
    DiscreteSystem::new(sys, grid.t0, dt, steps, substeps, DisturbanceMode::Held)
}

fn run_nn_loop(c: &NnLoopConfig, ctx: &mut Ctx) -> Result<Value> {
    let sys = SystemConfig::NeuralLoop { policy: c.policy.clone() }.build(&ctx.base_dir)?;
    let wset = c.disturbance.build()?;
    let x0 = c.initial.build()?;
    let dirs = sample_sphere(2, c.directions, SphereScheme::UniformAngle)?;
    let truth_dirs = sample_sphere(2, c.ground_truth, SphereScheme::UniformAngle)?;
    let alg = ctx.clock.time("extremal hulls", || estimate_hulls(sys.as_ref(), &wset, &x0, &dirs, &c.grid))?;
    let truth = ctx.clock.time("ground truth", || estimate_hulls(sys.as_ref(), &wset, &x0, &truth_dirs, &c.grid))?;
    let dsys = randup_discretization(sys.as_ref(), &c.grid, c.randup_dt)?;
    let randup = ctx.clock.time("randup", || randup_hulls(&dsys, &wset, &x0, c.randup_samples, c.seed))?;
    let d_alg = hausdorff(alg.last(), truth.last(), DEFAULT_HULL_TOL);
    let d_randup = hausdorff(randup.last(), truth.last(), DEFAULT_HULL_TOL);
    let mut containment = Value::Null;
    if let Some(v) = c.validation {
        let report = ctx.clock.time("validation", || {
            let r = monte_carlo_rollouts(sys.as_ref(), &wset, &x0, v.rollouts, c.seed, &c.grid)?;
            check_containment(&truth, &r, v.slack)
        })?;
        if report.violations > 0 {
            ctx.failures.push(format!(
                "{} Monte Carlo states outside the ground-truth hulls (max excess {:.3e})",
                report.violations, report.max_excess
            ));
        }
        containment = containment_json(&report, v.slack);
    }
    write_hulls(ctx, "extremal", &alg, usize::MAX)?;
    write_hulls(ctx, "ground_truth", &truth, usize::MAX)?;
    write_hulls(ctx, "randup", &randup, usize::MAX)?;
    Ok(json!({
        "directions": c.directions,
        "ground_truth_directions": c.ground_truth,
        "randup_samples": c.randup_samples,
        "hausdorff_final": {"extremal": d_alg, "randup": d_randup},
        "randup_over_extremal": d_randup / d_alg,
        "containment": containment,
    }))
}

fn trace_csv(trace: &ClosedLoopTrace, dt: f64) -> String {
    let mut out = String::from("k,t,q0,q1,q2,q3,w1,w2,w3,u1,u2,u3\n");
    for (k, x) in trace.states.iter().enumerate() {
        out.push_str(&format!("{k},{}", format_float(k as f64 * dt)));
        for v in x.iter() {
            out.push(',');
            out.push_str(&format_float(*v));
        }
        match trace.controls.get(k) {
            Some(u) => u.iter().for_each(|v| {
                out.push(',');
                out.push_str(&format_float(*v));
            }),
            None => out.push_str(",,,"),
        }
        out.push('\n');
    }
    out
}

/// Share of solves with at least three iterations whose step trace is
/// non-increasing from the second iteration on, up to the QP tolerance, and
/// the number of such solves.
pub fn scp_monotone_share(traces: &[Vec<f64>]) -> (f64, usize) {
    let long: Vec<&Vec<f64>> = traces.iter().filter(|t| t.len() >= 3).collect();
    if long.is_empty() {
        return (1.0, 0);
    }
    let ok = long
        .iter()
        .filter(|t| t[1..].windows(2).all(|w| w[1] <= w[0] + STEP_RESOLUTION))
        .count();
    (ok as f64 / long.len() as f64, long.len())
}

fn run_spacecraft_mpc(c: &SpacecraftMpcConfig, seeds_override: Option<usize>, ctx: &mut Ctx) -> Result<Value> {
    let seeds = seeds_override.unwrap_or(c.seeds);
    if seeds == 0 {
        return Err(Error::Config("--seeds must be >= 1".into()));
    }
    let mut spec = OcpSpec::benchmark(sample_sphere(3, c.directions, SphereScheme::Fibonacci)?);
    spec.substeps = c.substeps;
    let t = c.tightening;
    let tight = ctx.clock.time("tightening", || {
        compute_tightening(&spec, t.control_probes, t.probes, t.covering_probes, c.seed)
    })?;
    if !(tight.lbar_variation < LBAR_VARIATION_LIMIT) {
        ctx.failures.push(format!(
            "L_T varies by {:.1}% across control probes (limit {:.0}%)",
            100.0 * tight.lbar_variation,
            100.0 * LBAR_VARIATION_LIMIT
        ));
    }
    spec.tightening = tight.eps.clone();
    spec.validate()?;
    let cold = ScpConfig {
        max_iter: c.scp.max_iter,
        trust_region: c.scp.trust_region,
        tol: c.scp.tol,
        ..ScpConfig::default()
    };
    let warm = ScpConfig {
        max_iter: c.scp.warm_iter,
        ..cold.clone()
    };
    let runs: Vec<(Vector, ClosedLoopTrace)> = ctx.clock.time("closed loop", || {
        (0..seeds)
            .into_par_iter()
            .map(|s| {
                let run_seed = crate::rng::mix64(c.seed ^ crate::rng::mix64(s as u64));
                let mut rng = crate::rng::seeded(run_seed);
                let x0 = sample_initial_state(&mut rng);
                let cfg = ClosedLoopConfig {
                    steps: c.steps,
                    cold: cold.clone(),
                    warm: warm.clone(),
                    seed: crate::rng::mix64(run_seed),
                };
                mpc_closed_loop(&spec, &x0, &cfg).map(|tr| (x0, tr))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut per_seed = Vec::new();
    let mut total_violations = 0;
    let mut step_traces = Vec::new();
    for (s, (x0, tr)) in runs.iter().enumerate() {
        ctx.out.write(format!("trace_seed{s}.csv"), &trace_csv(tr, spec.dt))?;
        total_violations += tr.violations;
        let xf = tr.final_state();
        let omega_f = xf.rows(4, 3).amax();
        let quat_err = (&xf.rows(0, 4) - spec.reference.rows(0, 4)).norm();
        if !(omega_f < FINAL_OMEGA_LIMIT) {
            ctx.failures.push(format!("seed {s}: final |omega|_inf = {omega_f:.3e}"));
        }
        let failed_solves = tr.solves.iter().filter(|r| r.error.is_some()).count();
        for r in &tr.solves {
            step_traces.push(r.trace.iter().map(|i| i.step).collect::<Vec<_>>());
        }
        per_seed.push(json!({
            "seed": s,
            "initial_state": x0.iter().copied().collect::<Vec<_>>(),
            "violations": tr.violations,
            "peak_omega": tr.peak_omega,
            "peak_control": tr.peak_control,
            "final_omega_inf": omega_f,
            "final_quaternion_error": quat_err,
            "cold_iterations": tr.solves[0].trace.len(),
            "cold_status": tr.solves[0].status,
            "infeasible_solves": tr.solves.iter().filter(|r| r.status == Some(crate::mpc::ScpStatus::InfeasibleSubproblem)).count(),
            "failed_solves": failed_solves,
            "cold_trace": tr.solves[0].trace,
        }));
    }
    if total_violations > 0 {
        ctx.failures.push(format!("{total_violations} constraint violations across all runs"));
    }
    let (share, counted) = scp_monotone_share(&step_traces);
    if counted > 0 && share < SCP_MONOTONE_SHARE {
        ctx.failures.push(format!(
            "only {:.0}% of multi-iteration SCP solves have a non-increasing step trace",
            100.0 * share
        ));
    }
    Ok(json!({
        "seeds": seeds,
        "steps": c.steps,
        "directions": c.directions,
        "tightening": tight,
        "violations": total_violations,
        "scp_monotone_share": share,
        "scp_multi_iteration_solves": counted,
        "runs": per_seed,
    }))
}

/// Largest `‖w‖` over the disturbance set.
fn disturbance_bound(set: &SetConfig) -> Result<f64> {
    Ok(match set {
        SetConfig::Ball { center, radius } => Vector::from_column_slice(center).norm() + radius,
        SetConfig::Ellipsoid { center, shape } => {
            let q = rows(shape, "shape")?;
            Vector::from_column_slice(center).norm() + q.symmetric_eigen().eigenvalues.max().max(0.0).sqrt()
        }
    })
}

fn run_compare(c: &CompareConfig, ctx: &mut Ctx) -> Result<Value> {
    let sys = c.system.build(&ctx.base_dir)?;
    let n = sys.state_dim();
    let wset = c.disturbance.build()?;
    let x0 = c.initial.build()?;
    let grid = TimeGrid::new(0.0, c.dt * c.steps as f64, c.steps * c.substeps)?;
    let dirs = default_directions(n, c.budget, c.seed)?;
    let truth_dirs = default_directions(n, c.ground_truth, c.seed)?;
    let alg = ctx.clock.time("extremal hulls", || estimate_hulls(sys.as_ref(), &wset, &x0, &dirs, &grid))?;
    let truth = ctx.clock.time("ground truth", || estimate_hulls(sys.as_ref(), &wset, &x0, &truth_dirs, &grid))?;
    let held = DiscreteSystem::new(sys.as_ref(), 0.0, c.dt, c.steps, c.substeps, DisturbanceMode::Held)?;
    let randup = ctx.clock.time("randup", || randup_hulls(&held, &wset, &x0, c.budget, c.seed))?;
    let d_alg = hausdorff(alg.last(), &truth.last().clone(), DEFAULT_HULL_TOL);
    let d_randup = hausdorff(randup.last(), truth.last(), DEFAULT_HULL_TOL);

    let mut tube_json = Value::Null;
    if let InitialSet::Singleton(center) = &x0 {
        let additive = DiscreteSystem::new(sys.as_ref(), 0.0, c.dt, c.steps, c.substeps, DisturbanceMode::Additive)?;
        let wbar = disturbance_bound(&c.disturbance)?;
        let (tube, hbar) = ctx.clock.time("lipschitz tube", || {
            let nominal = additive.nominal_rollout(center)?;
            let mut hbar = 0.0f64;
            for (k, xk) in nominal.iter().enumerate().take(c.steps) {
                let half = Vector::from_element(n, c.operating_half_width);
                hbar = hbar.max(estimate_step_hessian_bound(
                    &additive,
                    k,
                    xk,
                    &half,
                    c.hessian_probes,
                    1e-3,
                    c.seed ^ k as u64,
                )?);
            }
            Ok((lipschitz_tube(&additive, center, wbar, hbar)?, hbar))
        })?;
        let report = ctx.clock.time("tube validation", || {
            let r = monte_carlo_discrete(&additive, &wset, &x0, c.validation.rollouts, c.seed)?;
            check_tube(&tube, &r, 1e-9)
        })?;
        if report.violations > 0 {
            ctx.failures.push(format!(
                "{} Monte Carlo states outside the Lipschitz tube (max excess {:.3e})",
                report.violations, report.max_excess
            ));
        }
        let tube_hull = tube.boundary_hull(c.steps, &truth_dirs)?;
        let d_tube = hausdorff(&tube_hull, truth.last(), DEFAULT_HULL_TOL);
        ctx.out.write_hull("lipschitz_tube", c.steps, &tube_hull)?;
        tube_json = json!({
            "wbar": wbar,
            "hbar": hbar,
            "hausdorff_final": d_tube,
            "soundness": containment_json(&report, 0.0),
        });
    }
    let k_alg = alg.hulls.len() - 1;
    ctx.out.write_hull("extremal", k_alg, alg.last())?;
    ctx.out.write_hull("ground_truth", k_alg, truth.last())?;
    ctx.out.write_hull("randup", c.steps, randup.last())?;
    Ok(json!({
        "system": sys.label(),
        "budget": c.budget,
        "ground_truth": c.ground_truth,
        "hausdorff_final": {"extremal": d_alg, "randup": d_randup},
        "randup_over_extremal": d_randup / d_alg,
        "lipschitz_tube": tube_json,
    }))
}

/// Benchmark systems with a disturbance set and initial set each.
pub(crate) fn benchmark_cases(grid: &TimeGrid) -> Result<Vec<(Box<dyn System>, SmoothConvexSet, InitialSet)>> {
    let ball = |n: usize, r: f64| SmoothConvexSet::ball(Vector::zeros(n), r);
    let control = ControlSignal::zeros(3, (grid.tf.ceil() as usize).max(1), 1.0);
    let mut q0 = Vector::zeros(7);
    q0[0] = 1.0;
    q0[4] = 0.05;
    Ok(vec![
        (
            Box::new(AttractionRepulsion::new(Vector::from_vec(vec![1.0, 0.0]), Vector::from_vec(vec![-1.0, 0.0]), 0.2)?),
            ball(2, 0.1)?,
            InitialSet::Singleton(Vector::from_vec(vec![0.0, -1.5])),
        ),
        (
            Box::new(Dubins::new(0.5, 0.5, Matrix::identity(3, 3))?),
            ball(3, 1e-2)?,
            InitialSet::Ovaloid(SmoothConvexSet::ellipsoid(
                Vector::zeros(3),
                Matrix::from_diagonal(&Vector::from_vec(vec![1e-3, 1e-3, 1e-4])),
            )?),
        ),
        (
            Box::new(NeuralLoop::shipped()),
            SmoothConvexSet::ball(Vector::zeros(2), 2f64.sqrt() / 20.0)?,
            InitialSet::Ovaloid(SmoothConvexSet::ellipsoid(
                Vector::from_vec(vec![2.75, 0.0]),
                Matrix::from_diagonal(&Vector::from_vec(vec![2.0 * 0.25 * 0.25, 2.0 * 0.1 * 0.1])),
            )?),
        ),
        (
            Box::new(SpacecraftOmega::benchmark(control)),
            ball(3, 1e-2)?,
            InitialSet::Singleton(Vector::from_vec(vec![0.05, -0.02, 0.03])),
        ),
        (
            Box::new(LinearSystem::single_integrator(2)),
            ball(2, 1.0)?,
            InitialSet::Singleton(Vector::zeros(2)),
        ),
    ])
}

fn run_validate(c: &ValidateConfig, ctx: &mut Ctx) -> Result<Value> {
    let mut rng = crate::rng::seeded(c.seed);
    // Jacobians of every benchmark system, including the 7-D attitude model.
    let mut jacobians = Vec::new();
    let control = ControlSignal::zeros(3, 10, 1.0);
    let mut systems: Vec<Box<dyn System>> = benchmark_cases(&c.grid)?.into_iter().map(|(s, _, _)| s).collect();
    systems.push(Box::new(SpacecraftFull::benchmark(control)));
    for sys in &systems {
        let n = sys.state_dim();
        let mut worst = (0.0f64, 0.0f64);
        for _ in 0..c.probes {
            let x = crate::geometry::sample_unit_ball(n, &mut rng) * 1.5;
            let x = if sys.label().starts_with("attraction") {
                // Stay clear of the cutoff shells around the poles.
                Vector::from_vec(vec![x[0] * 0.3, 0.5 + x[1].abs()])
            } else if n == 7 {
                let mut y = x * 0.1;
                y[0] += 1.0;
                y
            } else {
                x
            };
            let w = crate::geometry::sample_unit_ball(sys.disturbance_dim(), &mut rng);
            let chk = jacobian_check(sys.as_ref(), 0.5, &x, &w, 1e-4, 1e-8);
            worst = (worst.0.max(chk.drift), worst.1.max(chk.input));
        }
        if worst.0 > 1.0 || worst.1 > 1.0 {
            ctx.failures.push(format!("{}: Jacobian check score {:.3} / {:.3}", sys.label(), worst.0, worst.1));
        }
        jacobians.push(json!({"system": sys.label(), "drift_score": worst.0, "input_score": worst.1}));
    }

    // Gauss-map round trips.
    let c3 = Vector::from_vec(vec![0.3, -0.2, 0.1]);
    let half = Vector::from_vec(vec![1.0, 0.5, 2.0]);
    let shape = Matrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, 0.1, 0.0, 0.1, 0.5]);
    let sets = vec![
        ("ball", SmoothConvexSet::ball(c3.clone(), 0.7)?),
        ("ellipsoid", SmoothConvexSet::ellipsoid(c3.clone(), shape)?),
        ("lambda-under", SmoothConvexSet::lambda_ball(c3.clone(), half.clone(), 8.0, LambdaMode::Under)?),
        ("lambda-over", SmoothConvexSet::lambda_ball(c3.clone(), half, 8.0, LambdaMode::Over)?),
        ("lifted", lift_set(&SmoothConvexSet::ball(Vector::zeros(2), 1e-2)?, 3)?),
    ];
    let mut gauss = Vec::new();
    for (name, set) in &sets {
        let mut worst = 0.0f64;
        for d in sample_sphere_random(3, c.probes, &mut rng) {
            let x = set.inverse_gauss_map(&d)?;
            let back = set.gauss_map(&x)?;
            worst = worst.max((back.as_vector() - d.as_vector()).norm());
        }
        if worst > 1e-9 {
            ctx.failures.push(format!("{name}: Gauss-map round trip error {worst:.3e}"));
        }
        gauss.push(json!({"set": name, "max_error": worst}));
    }

    // Costate-scale invariance.
    let mut scale = Vec::new();
    for (sys, wset, x0) in benchmark_cases(&c.grid)? {
        let n = sys.state_dim();
        let mut worst = 0.0f64;
        for d in sample_sphere_random(n, 8, &mut rng) {
            let (xi, pi) = initial_pair(&d, &x0)?;
            let (reference, _, _) = integrate_costate(sys.as_ref(), &wset, xi.clone(), pi.clone(), &c.grid)?;
            for factor in [0.5, 3.0] {
                let (xs, _, _) = integrate_costate(sys.as_ref(), &wset, xi.clone(), &pi * factor, &c.grid)?;
                for (a, b) in xs.iter().zip(&reference) {
                    worst = worst.max((a - b).amax());
                }
            }
        }
        if worst > 1e-9 {
            ctx.failures.push(format!("{}: costate scaling changes x by {worst:.3e}", sys.label()));
        }
        scale.push(json!({"system": sys.label(), "max_deviation": worst}));
    }
    Ok(json!({
        "probes": c.probes,
        "jacobians": jacobians,
        "gauss_maps": gauss,
        "costate_scale": scale,
    }))
}
