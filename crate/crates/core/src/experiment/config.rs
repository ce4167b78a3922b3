//! Experiment configuration files.
//!
//! A config is a JSON object whose `experiment` key selects one of the
//! experiment kinds; the remaining keys are that kind's parameters. Sum types
//! are externally tagged, e.g. `{"ball": {"center": [0, 0], "radius": 1}}`.
//! Unknown keys anywhere in the document are collected and reported together.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sample_sphere, Direction, Matrix, SmoothConvexSet, SphereScheme, Vector};
use crate::reach::{InitialSet, TimeGrid};
use crate::systems::{AttractionRepulsion, ControlSignal, Dubins, LinearSystem, MlpPolicy, NeuralLoop, SpacecraftOmega, System};

pub const EXPERIMENT_IDS: [&str; 7] = [
    "reach",
    "dubins-rect",
    "dubins-lift",
    "nn-loop",
    "spacecraft-mpc",
    "compare",
    "validate",
];

fn default_emit_every() -> usize {
    1
}

fn default_slack() -> f64 {
    3e-3
}

fn default_half_width() -> f64 {
    0.05
}

fn default_probes() -> usize {
    1000
}

fn default_covering_probes() -> usize {
    100_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemConfig {
    SingleIntegrator {
        dim: usize,
    },
    /// `ẋ = Ax + Gw`; matrices are lists of rows.
    Linear {
        a: Vec<Vec<f64>>,
        g: Vec<Vec<f64>>,
    },
    AttractionRepulsion {
        attractor: Vec<f64>,
        repeller: Vec<f64>,
        cutoff: f64,
    },
    Dubins {
        v: f64,
        omega: f64,
        g: Vec<Vec<f64>>,
    },
    /// Double integrator closed by a softplus policy; the shipped policy when
    /// `policy` is absent.
    NeuralLoop {
        #[serde(default)]
        policy: Option<PathBuf>,
    },
    /// Closed-loop angular velocity under `ū` held at `dt`-spaced nodes
    /// (zero when `control` is empty).
    SpacecraftOmega {
        dt: f64,
        #[serde(default)]
        control: Vec<[f64; 3]>,
        horizon_steps: usize,
    },
}

impl SystemConfig {
    pub fn build(&self, base_dir: &Path) -> Result<Box<dyn System>> {
        Ok(match self {
            SystemConfig::SingleIntegrator { dim } => {
                if *dim == 0 {
                    return Err(Error::Config("single integrator needs dim >= 1".into()));
                }
                Box::new(LinearSystem::single_integrator(*dim))
            }
            SystemConfig::Linear { a, g } => Box::new(LinearSystem::new(rows(a, "a")?, rows(g, "g")?)?),
            SystemConfig::AttractionRepulsion {
                attractor,
                repeller,
                cutoff,
            } => Box::new(AttractionRepulsion::new(
                Vector::from_column_slice(attractor),
                Vector::from_column_slice(repeller),
                *cutoff,
            )?),
            SystemConfig::Dubins { v, omega, g } => Box::new(Dubins::new(*v, *omega, rows(g, "g")?)?),
            SystemConfig::NeuralLoop { policy } => Box::new(match policy {
                None => NeuralLoop::shipped(),
                Some(p) => NeuralLoop::double_integrator(MlpPolicy::load(&resolve(base_dir, p))?)?,
            }),
            SystemConfig::SpacecraftOmega {
                dt,
                control,
                horizon_steps,
            } => Box::new(SpacecraftOmega::benchmark(spacecraft_control(*dt, control, *horizon_steps)?)),
        })
    }
}

pub(crate) fn spacecraft_control(dt: f64, control: &[[f64; 3]], horizon_steps: usize) -> Result<ControlSignal> {
    if !(dt > 0.0) || horizon_steps == 0 {
        return Err(Error::Config("spacecraft control needs dt > 0 and horizon_steps >= 1".into()));
    }
    if control.is_empty() {
        return Ok(ControlSignal::zeros(3, horizon_steps, dt));
    }
    if control.len() != horizon_steps {
        return Err(Error::Config(format!(
            "control has {} nodes but horizon_steps is {horizon_steps}",
            control.len()
        )));
    }
    let flat: Vec<f64> = control.iter().flatten().copied().collect();
    ControlSignal::from_flat(0.0, dt, 3, &flat)
}

pub(crate) fn resolve(base_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

pub(crate) fn rows(r: &[Vec<f64>], name: &str) -> Result<Matrix> {
    let n = r.len();
    let m = r.first().map_or(0, |row| row.len());
    if n == 0 || m == 0 || r.iter().any(|row| row.len() != m) {
        return Err(Error::Config(format!("matrix `{name}` must be a non-empty list of equal-length rows")));
    }
    Ok(Matrix::from_fn(n, m, |i, j| r[i][j]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetConfig {
    Ball { center: Vec<f64>, radius: f64 },
    /// `{x : (x − c)ᵀ shape⁻¹ (x − c) ≤ 1}`.
    Ellipsoid { center: Vec<f64>, shape: Vec<Vec<f64>> },
}

impl SetConfig {
    pub fn build(&self) -> Result<SmoothConvexSet> {
        match self {
            SetConfig::Ball { center, radius } => SmoothConvexSet::ball(Vector::from_column_slice(center), *radius),
            SetConfig::Ellipsoid { center, shape } => {
                SmoothConvexSet::ellipsoid(Vector::from_column_slice(center), rows(shape, "shape")?)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialConfig {
    Point(Vec<f64>),
    Ball { center: Vec<f64>, radius: f64 },
    Ellipsoid { center: Vec<f64>, shape: Vec<Vec<f64>> },
}

impl InitialConfig {
    pub fn build(&self) -> Result<InitialSet> {
        Ok(match self {
            InitialConfig::Point(x) => InitialSet::Singleton(Vector::from_column_slice(x)),
            InitialConfig::Ball { center, radius } => InitialSet::Ovaloid(
                SetConfig::Ball {
                    center: center.clone(),
                    radius: *radius,
                }
                .build()?,
            ),
            InitialConfig::Ellipsoid { center, shape } => InitialSet::Ovaloid(
                SetConfig::Ellipsoid {
                    center: center.clone(),
                    shape: shape.clone(),
                }
                .build()?,
            ),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeConfig {
    UniformAngle,
    Fibonacci,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionsConfig {
    pub count: usize,
    pub scheme: SchemeConfig,
}

impl DirectionsConfig {
    pub fn scheme(&self, seed: u64) -> SphereScheme {
        match self.scheme {
            SchemeConfig::UniformAngle => SphereScheme::UniformAngle,
            SchemeConfig::Fibonacci => SphereScheme::Fibonacci,
            SchemeConfig::Random => SphereScheme::Random { seed },
        }
    }

    pub fn build(&self, n: usize, seed: u64) -> Result<Vec<Direction>> {
        sample_sphere(n, self.count, self.scheme(seed))
    }
}

/// Sampling effort behind the error bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default = "default_covering_probes")]
    pub covering_probes: usize,
}

/// Monte Carlo containment check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub rollouts: usize,
    #[serde(default = "default_slack")]
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub system: SystemConfig,
    pub disturbance: SetConfig,
    pub initial: InitialConfig,
    pub directions: DirectionsConfig,
    pub grid: TimeGrid,
    #[serde(default)]
    pub bounds: Option<BoundsConfig>,
    #[serde(default)]
    pub validation: Option<ValidationConfig>,
    #[serde(default = "default_emit_every")]
    pub emit_every: usize,
}

/// Dubins car with box disturbances (`G = I₃`) and a box of initial states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DubinsRectConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub v: f64,
    pub omega: f64,
    pub delta_w: Vec<f64>,
    pub x0_center: Vec<f64>,
    pub delta_x0: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub directions: DirectionsConfig,
    pub grid: TimeGrid,
    #[serde(default = "default_emit_every")]
    pub emit_every: usize,
}

/// Dubins car with a rank-deficient `G` and its ε-extensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DubinsLiftConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub v: f64,
    pub omega: f64,
    /// `3 × m` rows.
    pub g: Vec<Vec<f64>>,
    pub disturbance: SetConfig,
    pub initial: InitialConfig,
    pub epsilons: Vec<f64>,
    pub directions: DirectionsConfig,
    pub grid: TimeGrid,
    #[serde(default)]
    pub validation: Option<ValidationConfig>,
    #[serde(default = "default_emit_every")]
    pub emit_every: usize,
}

/// Neural feedback loop: Extremal hulls against RandUP and a dense ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NnLoopConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub policy: Option<PathBuf>,
    pub disturbance: SetConfig,
    pub initial: InitialConfig,
    pub directions: usize,
    pub ground_truth: usize,
    pub randup_samples: usize,
    /// RandUP step length; must divide the grid step count evenly.
    pub randup_dt: f64,
    pub grid: TimeGrid,
    #[serde(default)]
    pub validation: Option<ValidationConfig>,
}

/// Robust MPC closed-loop runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacecraftMpcConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub seeds: usize,
    pub steps: usize,
    pub directions: usize,
    pub substeps: usize,
    pub tightening: TighteningConfig,
    pub scp: ScpSettingsConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TighteningConfig {
    pub control_probes: usize,
    pub probes: usize,
    pub covering_probes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScpSettingsConfig {
    pub max_iter: usize,
    pub warm_iter: usize,
    pub trust_region: f64,
    pub tol: f64,
}

/// Equal-budget comparison on the spacecraft `ω` subsystem or the neural
/// loop: extremal hulls, RandUP and the Lipschitz tube against a ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub system: SystemConfig,
    pub disturbance: SetConfig,
    pub initial: InitialConfig,
    pub budget: usize,
    pub ground_truth: usize,
    pub dt: f64,
    pub steps: usize,
    pub substeps: usize,
    pub hessian_probes: usize,
    /// Half-width of the box around the nominal rollout in which the
    /// one-step Hessian bound is estimated.
    #[serde(default = "default_half_width")]
    pub operating_half_width: f64,
    pub validation: ValidationConfig,
}

/// Self-checks: Jacobians, Gauss-map round trips and costate-scale
/// invariance on the benchmark systems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidateConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub probes: usize,
    pub grid: TimeGrid,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentConfig {
    Reach(ReachConfig),
    DubinsRect(DubinsRectConfig),
    DubinsLift(DubinsLiftConfig),
    NnLoop(NnLoopConfig),
    SpacecraftMpc(SpacecraftMpcConfig),
    Compare(CompareConfig),
    Validate(ValidateConfig),
}

impl ExperimentConfig {
    pub fn id(&self) -> &'static str {
        match self {
            ExperimentConfig::Reach(_) => "reach",
            ExperimentConfig::DubinsRect(_) => "dubins-rect",
            ExperimentConfig::DubinsLift(_) => "dubins-lift",
            ExperimentConfig::NnLoop(_) => "nn-loop",
            ExperimentConfig::SpacecraftMpc(_) => "spacecraft-mpc",
            ExperimentConfig::Compare(_) => "compare",
            ExperimentConfig::Validate(_) => "validate",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ExperimentConfig::Reach(c) => c.seed,
            ExperimentConfig::DubinsRect(c) => c.seed,
            ExperimentConfig::DubinsLift(c) => c.seed,
            ExperimentConfig::NnLoop(c) => c.seed,
            ExperimentConfig::SpacecraftMpc(c) => c.seed,
            ExperimentConfig::Compare(c) => c.seed,
            ExperimentConfig::Validate(c) => c.seed,
        }
    }

    pub fn output(&self) -> Option<&Path> {
        match self {
            ExperimentConfig::Reach(c) => c.output.as_deref(),
            ExperimentConfig::DubinsRect(c) => c.output.as_deref(),
            ExperimentConfig::DubinsLift(c) => c.output.as_deref(),
            ExperimentConfig::NnLoop(c) => c.output.as_deref(),
            ExperimentConfig::SpacecraftMpc(c) => c.output.as_deref(),
            ExperimentConfig::Compare(c) => c.output.as_deref(),
            ExperimentConfig::Validate(c) => c.output.as_deref(),
        }
    }

    /// Parses and validates a config document. Every unknown key and every
    /// out-of-range value is listed in the error.
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        let id = value
            .get("experiment")
            .and_then(|v| v.as_str())
            .ok_or_else(|| parse_err("missing string key `experiment`".into()))?
            .to_string();
        let cfg = match id.as_str() {
            "reach" => ExperimentConfig::Reach(typed(&value, path)?),
            "dubins-rect" => ExperimentConfig::DubinsRect(typed(&value, path)?),
            "dubins-lift" => ExperimentConfig::DubinsLift(typed(&value, path)?),
            "nn-loop" => ExperimentConfig::NnLoop(typed(&value, path)?),
            "spacecraft-mpc" => ExperimentConfig::SpacecraftMpc(typed(&value, path)?),
            "compare" => ExperimentConfig::Compare(typed(&value, path)?),
            "validate" => ExperimentConfig::Validate(typed(&value, path)?),
            other => {
                return Err(parse_err(format!(
                    "experiment: unknown id `{other}` (expected one of {})",
                    EXPERIMENT_IDS.join(", ")
                )))
            }
        };
        let problems = cfg.problems();
        if !problems.is_empty() {
            return Err(parse_err(problems.join("; ")));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExperimentConfig::from_json(&text, path)
    }

    /// Range checks that the schema cannot express, as `key: message`.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                out.push(msg.to_string());
            }
        };
        fn grid_ok(g: &TimeGrid) -> bool {
            g.validate().is_ok()
        }
        match self {
            ExperimentConfig::Reach(c) => {
                check(c.directions.count >= 1, "directions.count: must be >= 1");
                check(grid_ok(&c.grid), "grid: needs tf > t0 and steps >= 1");
                check(c.emit_every >= 1, "emit_every: must be >= 1");
                if let Some(b) = c.bounds {
                    check(b.probes >= 2, "bounds.probes: must be >= 2");
                    check(b.covering_probes >= 1, "bounds.covering_probes: must be >= 1");
                }
                if let Some(v) = c.validation {
                    check(v.rollouts >= 1, "validation.rollouts: must be >= 1");
                    check(v.slack >= 0.0, "validation.slack: must be >= 0");
                }
            }
            ExperimentConfig::DubinsRect(c) => {
                check(c.delta_w.len() == 3, "delta_w: needs 3 entries");
                check(c.x0_center.len() == 3, "x0_center: needs 3 entries");
                check(c.delta_x0.len() == 3, "delta_x0: needs 3 entries");
                check(!c.lambdas.is_empty(), "lambdas: must be non-empty");
                check(c.lambdas.iter().all(|l| *l > 1.0), "lambdas: every value must exceed 1");
                check(c.directions.count >= 1, "directions.count: must be >= 1");
                check(grid_ok(&c.grid), "grid: needs tf > t0 and steps >= 1");
                check(c.emit_every >= 1, "emit_every: must be >= 1");
            }
            ExperimentConfig::DubinsLift(c) => {
                check(c.g.len() == 3, "g: needs 3 rows");
                check(!c.epsilons.is_empty(), "epsilons: must be non-empty");
                check(c.epsilons.iter().all(|e| *e > 0.0), "epsilons: every value must be positive");
                check(c.directions.count >= 1, "directions.count: must be >= 1");
                check(grid_ok(&c.grid), "grid: needs tf > t0 and steps >= 1");
                check(c.emit_every >= 1, "emit_every: must be >= 1");
                if let Some(v) = c.validation {
                    check(v.rollouts >= 1, "validation.rollouts: must be >= 1");
                }
            }
            ExperimentConfig::NnLoop(c) => {
                check(c.directions >= 1, "directions: must be >= 1");
                check(c.ground_truth >= 1, "ground_truth: must be >= 1");
                check(c.randup_samples >= 1, "randup_samples: must be >= 1");
                check(grid_ok(&c.grid), "grid: needs tf > t0 and steps >= 1");
                let ratio = (c.grid.tf - c.grid.t0) / c.randup_dt;
                check(
                    c.randup_dt > 0.0 && (ratio - ratio.round()).abs() < 1e-9 && ratio.round() >= 1.0,
                    "randup_dt: must divide the horizon",
                );
            }
            ExperimentConfig::SpacecraftMpc(c) => {
                check(c.seeds >= 1, "seeds: must be >= 1");
                check(c.steps >= 1, "steps: must be >= 1");
                check(c.directions >= 1, "directions: must be >= 1");
                check(c.substeps >= 1, "substeps: must be >= 1");
                check(c.tightening.control_probes >= 1, "tightening.control_probes: must be >= 1");
                check(c.tightening.probes >= 2, "tightening.probes: must be >= 2");
                check(c.tightening.covering_probes >= 1, "tightening.covering_probes: must be >= 1");
                check(c.scp.max_iter >= 1 && c.scp.warm_iter >= 1, "scp: iteration counts must be >= 1");
                check(c.scp.trust_region > 0.0 && c.scp.tol > 0.0, "scp: trust_region and tol must be positive");
            }
            ExperimentConfig::Compare(c) => {
                check(c.budget >= 1, "budget: must be >= 1");
                check(c.ground_truth >= 1, "ground_truth: must be >= 1");
                check(c.dt > 0.0 && c.steps >= 1 && c.substeps >= 1, "dt, steps, substeps: must be positive");
                check(c.hessian_probes >= 1, "hessian_probes: must be >= 1");
                check(c.operating_half_width > 0.0, "operating_half_width: must be positive");
                check(c.validation.rollouts >= 1, "validation.rollouts: must be >= 1");
            }
            ExperimentConfig::Validate(c) => {
                check(c.probes >= 2, "probes: must be >= 2");
                check(grid_ok(&c.grid), "grid: needs tf > t0 and steps >= 1");
            }
        }
        out
    }
}

/// Deserializes `value` as `T`, collecting every unknown key and reporting
/// type errors with their key path.
fn typed<T: serde::de::DeserializeOwned>(value: &serde_json::Value, path: &Path) -> Result<T> {
    let mut unknown = Vec::new();
    let mut track = serde_path_to_error::Track::new();
    let de = serde_path_to_error::Deserializer::new(value, &mut track);
    let parsed: std::result::Result<T, _> = serde_ignored::deserialize(de, |p| unknown.push(p.to_string()));
    let mut messages: Vec<String> = unknown.iter().map(|k| format!("{k}: unknown key")).collect();
    match parsed {
        Ok(v) if messages.is_empty() => return Ok(v),
        Ok(_) => {}
        Err(e) => messages.push(format!("{}: {e}", track.path())),
    }
    Err(Error::Parse {
        path: path.to_path_buf(),
        message: messages.join("; "),
    })
}
