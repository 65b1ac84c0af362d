use thiserror::Error;

use crate::lfunc::CharacterKey;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{a} is not coprime to the modulus {q}")]
    NotCoprime { a: i64, q: u64 },

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error("interval ({lo:.6e}, {hi:.6e}) exceeds integer range")]
    IntervalExceedsRange { lo: f64, hi: f64 },

    #[error("no prime found in interval ({lo}, {hi})")]
    NoPrimeInInterval { lo: u64, hi: u64 },

    #[error("character with discriminant {0} is not primitive for this operation")]
    NotPrimitive(i64),

    #[error("missing zeros for {0}")]
    MissingZeros(CharacterKey),

    #[error("zeros for {key} are unverified: {reason}")]
    Unverified { key: CharacterKey, reason: String },

    #[error("zeros for {key} only reach height {have}, need {need}")]
    InsufficientHeight { key: CharacterKey, have: f64, need: f64 },

    #[error(
        "accuracy {requested:e} unreachable: truncation error {achieved:e} at height {height}, \
         need height about {required_height:.0}"
    )]
    AccuracyUnreachable {
        requested: f64,
        achieved: f64,
        height: f64,
        required_height: f64,
    },

    #[error("numerical evaluation failed: {0}")]
    Numerical(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate zero {gamma} at line {line} (multiplicity > 1 violates linear independence)")]
    DuplicateZero { gamma: f64, line: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
