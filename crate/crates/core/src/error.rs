use thiserror::Error;

/// Errors produced by the simulator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("not a permutation of 1..={len}: {symbols:?}")]
    NotAPermutation { len: usize, symbols: Vec<u8> },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("weight {weight} outside 1..={max} for L = {len}")]
    WeightOutOfRange { weight: usize, len: usize, max: usize },

    #[error("L = {len} exceeds the exhaustive construction guard (max {max})")]
    LengthGuard { len: usize, max: usize },

    #[error("components {a} and {b} are not at Hamming distance L")]
    ComponentsOverlap { a: String, b: String },

    #[error("codebook has no entries")]
    EmptyCodebook,

    #[error("duplicate codebook entry {0}")]
    DuplicateEntry(String),

    #[error("intensity level {level} outside 1..={levels}")]
    LevelOutOfRange { level: usize, levels: usize },

    #[error("invalid PAM configuration: {0}")]
    InvalidPam(String),

    #[error("label {label} outside the {count} signaling points")]
    LabelOutOfRange { label: u64, count: u64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("link ({tx}, {rx}) outside a {len}x{len} channel")]
    LinkOutOfRange { tx: usize, rx: usize, len: usize },

    #[error("matrix dimensions do not agree: {0}")]
    Shape(String),

    #[error("cost matrix has no feasible assignment")]
    Infeasible,

    #[error("requested {k} assignments but only {max} exist")]
    TooManyAssignments { k: u128, max: u128 },

    #[error("detector {detector} does not support {reason}")]
    Unsupported { detector: String, reason: String },

    #[error("no codebook member found within {e_max} assignments")]
    NoDecision { e_max: usize },

    #[error("invalid scenario: {0}")]
    Scenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
