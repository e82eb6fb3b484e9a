use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("conversation {0} needs at least one agent and one human response")]
    MissingSpeaker(String),
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("differences have zero variance")]
    ZeroVariance,
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("contingency table must be square and non-empty")]
    NotSquare,
    #[error("contingency table is empty")]
    EmptyTable,
    #[error("ratings matrix must be rectangular with no missing cells")]
    Ragged,
    #[error("statistic is undefined for this input: {0}")]
    Degenerate(&'static str),
}
