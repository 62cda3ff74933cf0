use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A letter refers to a generator outside the ambient rank.
    #[error("letter index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: usize, rank: usize },

    /// Two values over different free groups were combined.
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    /// Malformed textual input.
    #[error("parse error: {0}")]
    Parse(String),

    /// A word was expected to lie in a subgroup but does not.
    #[error("word is not a member of the subgroup")]
    NotAMember,

    /// Iterating an endomorphism exceeded the configured letter budget.
    #[error("letter budget exceeded: needed {needed} letters, budget is {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    /// A word-problem operation was attempted on a presentation without an
    /// injectivity certificate.
    #[error("operation requires an injectivity-certified presentation")]
    NotInjective,

    /// An internal invariant failed; this indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
