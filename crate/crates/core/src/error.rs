use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structure(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular matrix: zero pivot in column {0}")]
    Singular(usize),

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("degenerate element {element}: area {area:e}")]
    DegenerateElement { element: usize, area: f64 },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("support of node {node} is empty (radius {radius})")]
    EmptySupport { node: usize, radius: f64 },

    #[error("fine vertex {0} is not covered by any support")]
    Uncovered(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("reference solution has zero norm")]
    ZeroNorm,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Wraps the error with the name of the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
