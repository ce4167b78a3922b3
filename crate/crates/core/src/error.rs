use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("direction is not unit norm (|‖d‖ - 1| = {0:.3e})")]
    InvalidDirection(f64),

    #[error("point outside the domain of the Gauss map: {0}")]
    Domain(String),

    #[error("cannot lift set: {0}")]
    UnsupportedLift(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("singular costate at t = {t}: ‖g(t,x)ᵀp‖ = {norm:.3e}")]
    SingularCostate { t: f64, norm: f64 },

    #[error("costate norm {norm:.3e} left [1e-8, 1e8] at t = {t}")]
    CostateScale { t: f64, norm: f64 },

    #[error("integration diverged at node {node} (t = {t})")]
    Divergence { node: usize, t: f64 },

    #[error("initial direction #{index} failed: {source}")]
    Direction {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("control signal undefined at t = {0}")]
    Interpolation(f64),

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("QP solver: {0}")]
    Qp(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
