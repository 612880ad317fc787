use thiserror::Error;

/// Errors surfaced by detection, localization, planning and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid communicator: {0}")]
    InvalidCommunicator(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("infeasible plan: {0}")]
    Infeasible(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("trace parse error at line {line}: {message}")]
    TraceParse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
