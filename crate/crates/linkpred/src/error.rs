use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by graph construction, dataset handling, solvers, and
/// predictors.
///
/// `Input` and `Config` describe problems with user-supplied data or
/// parameters; the remaining variants describe computations that refused to
/// run or failed to converge.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or out-of-range input data.
    #[error("input error: {0}")]
    Input(String),

    /// Inconsistent or unsupported configuration.
    #[error("config error: {0}")]
    Config(String),

    /// A dense kernel was requested on a graph above the size guard.
    #[error(
        "graph has {vertices} vertices but the dense kernel guard allows {limit}; \
         raise the guard (dense-guard) or switch to a spectral predictor"
    )]
    SizeGuard { vertices: usize, limit: usize },

    /// Katz series diverges: beta times the spectral radius is at least one.
    #[error("katz series diverges: beta {beta} * spectral radius {spectral_radius:.6} >= 1")]
    DivergentSeries { beta: f64, spectral_radius: f64 },

    /// Iterative eigensolver hit its iteration cap before reaching tolerance.
    #[error(
        "eigensolver did not converge within {iterations} iterations: \
         worst residual {residual:.3e} exceeds tolerance {tol:.3e}"
    )]
    NoConvergence {
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    /// Operation requires a connected graph.
    #[error("{operation} requires a connected graph; reduce to the largest connected component first")]
    Disconnected { operation: &'static str },

    /// Filesystem error with the path that caused it.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error stems from user input or configuration rather
    /// than a failed computation. The CLI maps this to its usage exit code.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Input(_) | Error::Config(_) | Error::Io { .. })
    }
}
