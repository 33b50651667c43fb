use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("words are powers of a common word")]
    PowersOfSameWord,

    #[error("words do not commute")]
    NotCommuting,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("memory budget exceeded: predicted length {predicted} > budget {budget}")]
    BudgetExceeded { predicted: BigUint, budget: usize },

    #[error("word too short: need at least {needed} symbols, have {have}")]
    WordTooShort { needed: usize, have: usize },

    #[error("insufficient depth: factor sets first disagree at length {n}")]
    InsufficientDepth { n: usize },

    #[error("language table has not been validated")]
    NotValidated,

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("input is not a concatenation of the level-{level} blocks (stuck at offset {offset})")]
    NotAConcatenation { level: usize, offset: usize },

    #[error("{0} is below the range of the closed-form formula")]
    OutOfRange(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("insufficient precision: need at least {needed_bits} bits")]
    InsufficientPrecision { needed_bits: u64 },

    #[error("complexity too high: {0}")]
    ComplexityTooHigh(String),

    #[error("growth schedule too tight at level {level}: no prime after {tried} candidates")]
    ScheduleTooTight { level: usize, tried: u64 },

    /// A proven inequality failed on concrete data; this indicates a bug.
    #[error("bound violated: {0}")]
    BoundViolation(String),
}
