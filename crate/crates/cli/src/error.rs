use std::fmt;

/// Failures surfaced by the command layer, each tied to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad config, unknown preset, parse error, or a precondition violation.
    #[error("config error: {0}")]
    Config(String),
    /// The analysis ran and the answer is negative, e.g. an unreachable mode.
    #[error("{0}")]
    Negative(String),
    /// Eigensolver failure or a non-finite result.
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Negative(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub(crate) fn config(e: impl fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub(crate) fn numeric(e: impl fmt::Display) -> Self {
        CliError::Numeric(e.to_string())
    }
}
