//! Deterministic simulator for an effective single-attention-head model of
//! greedy token generation over content-type embeddings.
//!
//! The library evolves a context vector under softmax attention at an
//! effective temperature, selects content types greedily by maximal
//! projection, detects tipping points (transitions between emitted content
//! types), and evaluates a closed-form prediction of the tipping step for
//! configurations that satisfy its geometric preconditions.

pub mod attention;
pub mod embedding;
pub mod io;
pub mod scenario;
pub mod tipping;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("label must be nonempty")]
    EmptyLabel,
    #[error("vocabulary must contain at least one entry")]
    EmptyVocabulary,
    #[error("non-finite component in vector for `{0}`")]
    NonFiniteComponent(String),
    #[error("vector must have at least one component")]
    EmptyVector,
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("unknown symbol `{symbol}` at position {position}")]
    UnknownSymbol { symbol: String, position: usize },
    #[error("history must be nonempty")]
    EmptyHistory,
    #[error("prompt must be nonempty")]
    EmptyPrompt,
    #[error("scores must be nonempty")]
    EmptyScores,
    #[error("non-finite attention score")]
    NonFiniteScore,
    #[error("t_eff must be positive and finite, got {0}")]
    InvalidTemperature(f64),
    #[error("max_steps must be at least 1")]
    InvalidStepLimit,
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("sweep value list must be nonempty")]
    EmptySweepValues,
    #[error("invalid sweep value {value} for parameter `{param}`: {reason}")]
    InvalidSweepValue {
        param: String,
        value: f64,
        reason: String,
    },
    #[error("invalid parameter path `{0}`")]
    InvalidParameterPath(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
