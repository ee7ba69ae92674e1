use std::path::PathBuf;

/// Errors produced by the screening library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A mathematical argument was outside its natural domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller-supplied data violated a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A Gibbs iteration hit a numerical failure (e.g. non-positive-definite
    /// posterior scale) in the given cluster.
    #[error("chain iteration failed in cluster {cluster}: {detail}")]
    ChainIteration { cluster: usize, detail: String },

    /// MCMC settings requested zero saved iterations.
    #[error("no saved iterations requested (n_save must be >= 1)")]
    NoSavedIterations,

    /// An observation had zero density under every mixture component.
    #[error("zero predictive support at observation {index}")]
    ZeroPredictiveSupport { index: usize },

    #[error("csv error in {path}: {detail}")]
    Csv { path: PathBuf, detail: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
