use thiserror::Error;

/// Errors produced by the bound solvers, factor evaluations, and recovery
/// algorithms.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A bracketing root-finder could not locate a sign change.
    #[error("no root: {0}")]
    NoRoot(String),

    /// A factor or level value is undefined at the requested point
    /// (e.g. a lower deviation L >= 1, or a sparsity multiple leaving the
    /// admissible phase region).
    #[error("undefined: {0}")]
    Undefined(String),

    /// Matrix and vector shapes do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A least-squares subproblem was numerically rank deficient.
    #[error("rank deficient: {0}")]
    RankDeficient(String),

    /// Exhaustive subset enumeration would exceed the configured guard.
    #[error("combinatorial blowup: {subsets} subsets exceeds guard {guard}; use a Monte Carlo estimate instead")]
    CombinatorialBlowup { subsets: u128, guard: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
