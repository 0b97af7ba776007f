use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConicError {
    #[error("block index {block} out of range ({count} blocks)")]
    UnknownBlock { block: usize, count: usize },

    #[error("coefficient for block {block} has shape {got}, expected {expected}")]
    ShapeMismatch { block: usize, got: String, expected: String },

    #[error("coefficient kind not supported on a nonnegative block ({0})")]
    UnsupportedCoeff(&'static str),

    #[error("problem has no blocks")]
    Empty,

    #[error("non-finite data in {0}")]
    NonFinite(&'static str),
}
