use thiserror::Error;

/// Errors produced by the budget model, mechanisms, and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("budget has {got} projects, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("budget entry {index} is {value}, expected a value in [0, 1]")]
    NegativeEntry { index: usize, value: f64 },

    #[error("budget entries sum to {sum}, expected 1 within {tol}")]
    BadSum { sum: f64, tol: f64 },

    #[error("budget entry {index} is {value}, above its cap {cap}")]
    CapExceeded { index: usize, value: f64, cap: f64 },

    #[error("vote profile is empty")]
    EmptyProfile,

    #[error("profile needs at least one project")]
    NoProjects,

    #[error("{n} voters exceed the table limit of {max}")]
    TooManyVoters { n: usize, max: usize },

    #[error("voter index {index} out of range for {n} voters")]
    VoterOutOfRange { index: usize, n: usize },

    #[error("{0} is not a subset of the table's voter set")]
    NotASubset(String),

    #[error("alpha is {0}, expected a value in [0, 1]")]
    BadAlpha(f64),

    #[error("{0}")]
    InvalidParameter(String),

    #[error("enumeration needs {needed} mechanism draws, above the limit {limit}")]
    EnumerationTooLarge { needed: u128, limit: u128 },

    #[error("linear program is malformed: {0}")]
    BadProgram(String),

    #[error("simplex failed to converge within {0} pivots")]
    PivotLimit(usize),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}
