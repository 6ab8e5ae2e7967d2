use thiserror::Error;

/// Errors raised by model validation, the solvers and the generators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("kernel row {row} is not stochastic (deviation {deviation:e})")]
    RowNotStochastic { row: usize, deviation: f64 },
    #[error("discount factor {0} is outside (0, 1)")]
    GammaOutOfRange(f64),
    #[error("cost entry {index} is not finite")]
    NonFiniteCost { index: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("action {action} is not valid in state {state}")]
    InvalidAction { state: usize, action: usize },
    #[error("linear system is singular")]
    SingularSystem,
    #[error("vector is not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("stationary distribution is not unique")]
    NonUniqueStationary,
    #[error("eigenvalue iteration did not converge")]
    ConvergenceFailure,
    #[error("branching factor {branching} exceeds state count {n}")]
    BranchingTooLarge { branching: usize, n: usize },
    #[error("slip probability {0} is outside [0, 1)")]
    InvalidSlip(f64),
    #[error("goal cell ({row}, {col}) lies outside the grid")]
    GoalOutOfBounds { row: usize, col: usize },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
