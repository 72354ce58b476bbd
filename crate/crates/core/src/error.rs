use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain spec: {0}")]
    InvalidSpec(String),
    #[error("resolution too low: n1={n1}, n2={n2} (need at least 8 nodes per direction)")]
    ResolutionTooLow { n1: usize, n2: usize },
    #[error("domain has no boundary")]
    NoBoundary,
    #[error("time derivative requested but not available")]
    MissingTimeDerivative,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("boundary condition violated: {0}")]
    BCViolation(String),
    #[error("incompatible Neumann data: mismatch {mismatch:.3e} exceeds tolerance {tol:.3e}")]
    IncompatibleData { mismatch: f64, tol: f64 },
    #[error("linear solver did not reach tolerance: relative residual {0:.3e}")]
    SolverDiverged(f64),
    #[error("linear solve failed: {0}")]
    LinearSolveFailed(String),
    #[error("boundary enforcement failed: {0}")]
    BCEnforcementFailed(String),
    #[error("advective CFL number {cfl:.3} exceeds {limit}")]
    CFLViolation { cfl: f64, limit: f64 },
    #[error("Picard iteration is not contracting (ratios {ratios:?})")]
    NoContraction { ratios: Vec<f64> },
    #[error("Picard iteration did not converge in {iterations} iterations (last delta {delta:.3e})")]
    MaxIterExceeded { iterations: usize, delta: f64 },
    #[error("circulation constraint system is singular")]
    CirculationSystemSingular,
    #[error("sweep finished {completed} of {requested} viscosities")]
    PartialSweep { completed: usize, requested: usize },
    #[error("mismatched inputs: {0}")]
    Mismatch(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
