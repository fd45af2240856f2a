use thiserror::Error;

/// Errors raised anywhere in the laboratory.
///
/// Variants split into three families that the command-line front end maps to
/// exit codes: parameter and guard violations (pre-flight), numerical aborts
/// (mid-run), and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("guard violation: {0}")]
    Guard(String),

    #[error("numerical abort: {0}")]
    Numerical(String),

    #[error("series did not decay below tolerance within {terms} terms (last term norm {last_norm:e})")]
    SeriesDiverged { terms: usize, last_norm: f64 },

    #[error("truncation leakage {leakage:e} exceeds threshold {threshold:e}")]
    Leakage { leakage: f64, threshold: f64 },

    #[error("{0}")]
    Config(#[from] crate::runner::ConfigErrors),

    #[error("{label}: {source}")]
    Labeled {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures detected before any time stepping starts.
    pub fn is_guard(&self) -> bool {
        match self {
            Error::GridMismatch(_)
            | Error::InvalidParameter(_)
            | Error::Guard(_)
            | Error::Config(_) => true,
            Error::Labeled { source, .. } => source.is_guard(),
            _ => false,
        }
    }

    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Numerical(_) | Error::SeriesDiverged { .. } | Error::Leakage { .. } => true,
            Error::Labeled { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub fn labeled(self, label: impl Into<String>) -> Self {
        Error::Labeled {
            label: label.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
