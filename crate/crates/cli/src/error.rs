use thiserror::Error;

/// Failures of a CLI command, each with its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] vortibc::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use vortibc::Error as E;
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(e) => match e {
                E::InvalidSpec(_) | E::ResolutionTooLow { .. } | E::BCViolation(_) | E::IncompatibleData { .. } => 2,
                E::NoContraction { .. } => 3,
                E::PartialSweep { .. } => 5,
                _ => 4,
            },
            CliError::Io(_) => 4,
        }
    }
}
