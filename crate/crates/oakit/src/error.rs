//! Crate-wide error type.

use crate::oa::Stage;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("q = {0} is not prime")]
    NonPrimeQ(u32),

    #[error("dimension d = {d} is too small (minimum {min})")]
    DimensionTooSmall { d: usize, min: usize },

    #[error("dimension d = {d} is too large (maximum {max})")]
    DimensionTooLarge { d: usize, max: usize },

    #[error("strength t = {t} exceeds column count d = {d}")]
    StrengthExceedsDimension { t: u32, d: usize },

    #[error("permutation length must be at least 1")]
    ZeroLength,

    #[error("mapping is not a bijection")]
    InvalidPermutation,

    #[error("operation requires stage {expected}, array is at stage {got}")]
    WrongStage { expected: Stage, got: Stage },

    #[error("operation requires strength t = {expected}, array has t = {got}")]
    WrongStrength { expected: u32, got: u32 },

    #[error("column {col}: symbol {sym} occurs {got} times, expected {want}")]
    UnbalancedColumn {
        col: usize,
        sym: u32,
        got: usize,
        want: usize,
    },

    #[error("bin count {bins} does not evenly divide {n} points")]
    BadBinCount { bins: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("too few values for {context}: got {got}, need at least {need}")]
    TooFewValues {
        context: &'static str,
        got: usize,
        need: usize,
    },

    #[error("sample standard deviation is zero")]
    DegenerateVariance,

    #[error("grid size {m} is not a multiple of the finest scale {required}")]
    GridMisaligned { m: usize, required: usize },

    #[error("truncation level {level} exceeds configured maximum {max}")]
    TruncationExceeded { level: u32, max: u32 },

    #[error("{what} out of range: got {got}, maximum {max}")]
    IndexOutOfRange {
        what: &'static str,
        got: u64,
        max: u64,
    },

    #[error("need at least {min} replicates, got {got}")]
    InsufficientReplicates { got: usize, min: usize },

    #[error("unknown integrand id {0:?}")]
    UnknownIntegrand(String),

    #[error("unknown design {0:?}")]
    UnknownDesign(String),

    #[error("parse error: {0}")]
    Parse(String),
}
