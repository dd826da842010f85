use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BanditError {
    /// A configuration or parameter constraint was violated.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("arm index {index} out of range for {n_arms} arms")]
    ArmIndex { index: usize, n_arms: usize },

    /// An adversarial sequence was read past its last row.
    #[error("sequence exhausted: round {round} requested but only {rows} rows are available")]
    SequenceExhausted { round: usize, rows: usize },

    #[error("probability vector invalid: {0}")]
    Probability(String),

    /// A closed-form quantity is undefined for the given parameters.
    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("too many subsets ({count}) for exact enumeration; use greedy mode")]
    Combinatorial { count: u128 },
}

pub type Result<T> = std::result::Result<T, BanditError>;

pub(crate) fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(BanditError::Config(msg.into()))
}
