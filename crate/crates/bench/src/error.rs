use thiserror::Error;

/// Failures of the experiment harness.
#[derive(Debug, Error)]
pub enum BenchError {
    /// Bad configuration or arguments.
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse config file: {0}")]
    ConfigSyntax(#[from] serde_json::Error),
    #[error("quantiles of an empty group")]
    EmptyGroup,
    #[error("reference value is not a fixed point (residual {residual:e})")]
    InconsistentReference { residual: f64 },
    #[error(transparent)]
    Solver(#[from] rankone_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0} invariant checks failed")]
    ChecksFailed(usize),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl BenchError {
    /// Process exit code: 1 for validation problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) | BenchError::ConfigSyntax(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
