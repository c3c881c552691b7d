use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, selectors or unreadable inputs; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// A computation failed or disagreed with its expected value; exit code 1.
    #[error("{0}")]
    Failed(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            _ => 2,
        }
    }
}

/// Library errors surface as computation failures.
pub fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}
