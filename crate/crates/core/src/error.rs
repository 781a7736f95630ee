use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numerics toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("structural mismatch: {0}")]
    Structure(String),
    #[error("matrix is not uniformly elliptic with parameter {delta}: {detail}")]
    Ellipticity { delta: f64, detail: String },
    #[error("chart singularity: {0}")]
    ChartSingularity(String),
    #[error("point outside chart: {0}")]
    Range(String),
    #[error("normal vector is not a unit vector (|n| = {0})")]
    Normalization(f64),
    #[error("kernel evaluated at its singular point v = 0")]
    Singularity,
    #[error("data error: {0}")]
    Data(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("linear solver failed: {0}")]
    Solver(String),
    #[error("time step too large: {0}")]
    StepSize(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
