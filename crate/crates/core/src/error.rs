use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degree {n} outside the supported range 1..={cap}")]
    DegreeOutOfRange { n: usize, cap: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("rank {rank} out of range for degree {n} (n! = {count})")]
    RankOutOfRange { rank: usize, n: usize, count: usize },

    /// The input is outside the domain of a payoff or metric.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid canonical choice: {0}")]
    InvalidChoice(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    /// A hypothesis required by a bound does not hold. The message names the witness.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("maximum payoff over the orbit is zero")]
    ZeroMaximum,

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("eigendecomposition failed verification: {0}")]
    Solver(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
