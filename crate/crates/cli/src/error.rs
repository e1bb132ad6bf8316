use thiserror::Error;

/// Failures surfaced by the command line, each tied to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or arguments (exit 2).
    #[error("{0}")]
    Validation(String),
    /// A self-check or invariant exceeded its tolerance (exit 3).
    #[error("{0}")]
    Tolerance(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Tolerance(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<alpha_channel::Error> for CliError {
    fn from(e: alpha_channel::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}
