use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    NonConvergence(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Io(_) | CliError::Json(_) => 2,
        }
    }
}

/// Solver errors from the toolkit crates all count as non-convergence.
pub fn numerical<E: std::fmt::Display>(e: E) -> CliError {
    CliError::NonConvergence(e.to_string())
}
