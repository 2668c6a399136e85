use thiserror::Error;

/// Errors surfaced by problem construction, solver configuration, and runs.
#[derive(Debug, Error)]
pub enum SsdcError {
    /// A parameter fell outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A solver or schedule needs a problem constant that was not provided.
    #[error("missing problem constant: {0}")]
    MissingConstant(String),

    /// A configuration is internally inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A value left the admissible domain (NaN, infinity, or an
    /// infeasible point for the regularizer).
    #[error("domain violation in {context}: {detail}")]
    Domain { context: String, detail: String },

    /// An iterate grew beyond the divergence guard.
    #[error("solver diverged at {context}: |x| = {norm:.3e}")]
    Diverged { context: String, norm: f64 },
}

impl SsdcError {
    pub fn parameter(msg: impl Into<String>) -> Self {
        SsdcError::Parameter(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        SsdcError::Config(msg.into())
    }

    pub fn domain(context: impl Into<String>, detail: impl Into<String>) -> Self {
        SsdcError::Domain {
            context: context.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, SsdcError>;
