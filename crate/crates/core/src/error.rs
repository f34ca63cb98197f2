use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}D field, got {actual}D")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("grid too large for direct quadrature: {cells} cells (limit {limit})")]
    GridTooLarge { cells: usize, limit: usize },

    #[error("inadmissible exponents: {0}")]
    Inadmissible(String),

    #[error("degenerate field: {0}")]
    Degenerate(String),

    #[error("config {path}: line {line}: {message}")]
    Config {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("config key `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("time step {dt:e} exceeds stability limit {limit:e}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("boundary mass monitor tripped at t = {t}: edge value {edge:e} exceeds {limit:e}")]
    BoundaryMass { t: f64, edge: f64, limit: f64 },

    #[error("positivity lost at t = {t}: min u = {min:e}, max u = {max:e}")]
    Positivity { t: f64, min: f64, max: f64 },

    #[error("non-finite values in field at t = {0}")]
    NonFinite(f64),

    #[error("incomplete sweep: {0}")]
    IncompleteSweep(String),

    #[error("malformed input {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
