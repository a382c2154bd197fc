use alloc::string::String;

/// Errors produced by the core routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid coefficient triple: {0}")]
    InvalidTriple(&'static str),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("not in Hatano-Nelson class at index {index}: {reason}")]
    NotHatanoNelson { index: usize, reason: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sequence too short: need {needed} triples, have {available}")]
    LengthMismatch { needed: usize, available: usize },

    #[error("non-finite value encountered at step {step}")]
    NonFinite { step: usize },

    #[error("angular distance is undefined for a zero vector")]
    ZeroVector,

    #[error("eigenvalue iteration did not converge at index {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("singular value sweeps did not converge after {sweeps} sweeps")]
    SvdNoConvergence { sweeps: usize },

    #[error("matrix dimension {n} exceeds the supported cap {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("{collisions} of {cells} grid nodes coincide with atoms; jitter the grid")]
    GridCollisions { collisions: usize, cells: usize },

    #[error("negative density {mass:e} at cell ({ix}, {iy})")]
    NegativeDensity { ix: usize, iy: usize, mass: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
