use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("group too large for exhaustive search: |G| = {0}")]
    GroupTooLarge(usize),
    #[error("search grid too large: {0} pairs")]
    GridTooLarge(u128),
    #[error("missing Khintchine constants for q = {0}")]
    MissingConstants(f64),
    #[error("translates overlap: {0}")]
    TranslatesOverlap(String),
    #[error("negative kernel entry at index {0}")]
    NegativeKernel(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
