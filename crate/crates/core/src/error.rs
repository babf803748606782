use thiserror::Error;

/// Errors produced by validation and the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is empty")]
    Empty,
    #[error("row {row} has {got} entries, expected {expected}")]
    NotRectangular { row: usize, expected: usize, got: usize },
    #[error("entry ({0}, {1}) is not finite")]
    NonFinite(usize, usize),
    #[error("entry ({0}, {1}) is negative")]
    NegativeEntry(usize, usize),
    #[error("entry ({0}, {1}) lies strictly between 0 and 1")]
    EntryBelowOne(usize, usize),
    #[error("row {0} is identically zero")]
    ZeroRow(usize),
    #[error("column {0} is identically zero")]
    ZeroColumn(usize),
    #[error("entry ({0}, {1}) is not a nonnegative integer")]
    NonIntegerEntry(usize, usize),
    #[error("dimension matrix is not connected")]
    NotConnected,
    #[error("operand {0} of the composition is not connected")]
    OperandNotConnected(usize),
    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("(D beta)_{row} = {got} but alpha_{row} = {expected}")]
    BetaAlphaViolation { row: usize, expected: u64, got: u64 },
    #[error("expectation weights do not match the support of D at ({0}, {1})")]
    SupportMismatch(usize, usize),
    #[error("column {0} of the expectation matrix sums to {1}, not 1")]
    NotStochastic(usize, f64),
    #[error("factor-case additivity needs a 1xn or mx1 matrix, got {0}x{1}")]
    NotFactorCase(usize, usize),
    #[error("oracle failed to converge after {0} restarts")]
    OracleNoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
