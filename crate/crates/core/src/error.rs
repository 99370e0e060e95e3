//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A matrix row fails the stochasticity check (entries in [0, 1] up to
    /// tolerance and summing to 1 up to tolerance).
    #[error("row {row} is not stochastic (deviation {deviation:e})")]
    NonStochastic { row: usize, deviation: f64 },

    /// Alphabet sizes of the arguments do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Interpolation coefficient outside [0, 1].
    #[error("interpolation coefficient {0} is outside [0, 1]")]
    BadAlpha(f64),

    /// The binary operation table fails the uniformity-preservation check:
    /// `a -> a * b` is not a permutation for the named `b`.
    #[error("operation is not uniformity preserving: column b = {column} is not a permutation")]
    NotUniformityPreserving { column: usize },

    /// Mixture coefficients are negative or do not sum to 1.
    #[error("bad mixture weights: {0}")]
    BadWeights(String),

    /// The measure's mean is not the uniform distribution, so it does not
    /// represent any channel.
    #[error("measure is not balanced (deviation {deviation:e})")]
    NotBalanced { deviation: f64 },

    /// An exhaustive enumeration would exceed the configured cap.
    #[error("enumeration of size {size} exceeds the cap of {cap}")]
    TooLarge { size: u128, cap: u64 },

    /// An iterative solver ran out of iterations before reaching the
    /// requested tolerance.
    #[error("no convergence after {iterations} iterations (gap {gap:e})")]
    NoConvergence { iterations: u64, gap: f64 },

    /// A file or string could not be parsed into a domain object.
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure, with the offending path when known.
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}
