use std::path::PathBuf;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },

    #[error("cell {cell}: {reason}")]
    Cell { cell: usize, reason: String },

    #[error("partition: {0}")]
    Partition(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("incompatible boundary data: net flux {flux:e} (must vanish)")]
    IncompatibleBoundary { flux: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("subdomain {sub}: {reason}")]
    Subdomain { sub: usize, reason: String },

    #[error("macro edge {edge}: {reason}")]
    Edge { edge: usize, reason: String },

    #[error("benign subspace violated at iteration {iteration}: {quantity} = {value:e}")]
    BenignViolated {
        iteration: usize,
        quantity: &'static str,
        value: f64,
    },

    #[error("no convergence after {iterations} iterations (relative residual {rel_residual:e})")]
    NoConvergence { iterations: usize, rel_residual: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
