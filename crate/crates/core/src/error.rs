use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("M must be a power of two >= 4, got {0}")]
    InvalidSchemeSize(u64),
    #[error("register degree must be in 2..=64, got {0}")]
    InvalidDegree(usize),
    #[error("tap position {tap} outside 1..={degree}")]
    TapOutOfRange { tap: usize, degree: usize },
    #[error("tap set must include the oldest cell {0}")]
    MissingOldestTap(usize),
    #[error("register state is all zero")]
    ZeroState,
    #[error("register state {state:#x} does not fit in {degree} cells")]
    StateTooWide { state: u64, degree: usize },
    #[error("invalid seed key: {0}")]
    InvalidSeedKey(&'static str),
    #[error("basis index {l} outside 0..{limit}")]
    BasisOutOfRange { l: u64, limit: u64 },
    #[error("mean photon number must be finite and non-negative, got {0}")]
    InvalidMeanPhotons(f64),
    #[error("the Gaussian angle channel needs a positive mean photon number, got {0}")]
    NonPositiveMeanPhotons(f64),
    #[error("sequence lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("known plaintext [{offset}, {end}) exceeds transcript length {len}")]
    MisalignedPlaintext { offset: usize, end: usize, len: usize },
    #[error("row has {got} columns, system expects {expected}")]
    WidthMismatch { got: usize, expected: usize },
    #[error("linear system has no rows")]
    EmptySystem,
    #[error("observation row {row} is inconsistent with earlier rows")]
    Inconsistent { row: usize },
    #[error("recovered key is not unique (rank {rank} of {degree})")]
    KeyNotUnique { rank: usize, degree: usize },
    #[error("joint count table is empty")]
    EmptyCounts,
    #[error("transcript is empty")]
    EmptyTranscript,
    #[error("at least {min} pulses per sweep point are required, got {got}")]
    TooFewPulses { min: usize, got: usize },
}
