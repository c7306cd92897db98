use std::path::PathBuf;

use crate::trace::Trace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("disconnected graph: m={m}, p={p}, no connected sample after {attempts} attempts")]
    DisconnectedSample { m: usize, p: f64, attempts: usize },

    #[error("graph is disconnected; the mixing matrix would not contract")]
    Disconnected,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("diverged at iteration {t}: {reason}")]
    Diverged {
        t: usize,
        reason: String,
        /// Records collected before the divergence was detected.
        partial: Box<Trace>,
    },

    #[error("iteration cap {cap} reached before tolerance (last gradient norm {residual:e})")]
    IterationCap { cap: usize, residual: f64 },

    #[error("eigensolver did not converge after {0} sweeps")]
    EigenNoConvergence(usize),

    #[error("config: {0}")]
    Config(String),

    #[error("method `{method}`: {source}")]
    Method {
        method: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag, used for the CLI's structured error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::DisconnectedSample { .. } | Error::Disconnected => "disconnected_graph",
            Error::Parse { .. } => "parse",
            Error::Diverged { .. } => "diverged",
            Error::IterationCap { .. } => "iteration_cap",
            Error::EigenNoConvergence(_) => "eigensolver",
            Error::Config(_) => "config",
            Error::Method { source, .. } => source.kind(),
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn with_method(self, method: &str) -> Error {
        Error::Method {
            method: method.to_string(),
            source: Box::new(self),
        }
    }
}
