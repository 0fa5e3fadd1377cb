//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DunklError {
    #[error("invalid root: {0}")]
    InvalidRoot(String),

    /// Reflecting `beta` across `alpha` produced a vector outside the set.
    #[error("not a root system: sigma_{{{alpha}}}({beta}) = {image} is not in the set")]
    NotARootSystem {
        alpha: String,
        beta: String,
        image: String,
    },

    #[error("group closure exceeded cap of {cap} elements")]
    RunawayClosure { cap: usize },

    #[error("unsupported multiplicity: {0}")]
    UnsupportedMultiplicity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A numerical routine missed its error target. `achieved` is the
    /// estimate it could certify; `partial` carries the best value found.
    #[error("precision failure: achieved {achieved:e}, requested {requested:e}")]
    PrecisionFailure {
        achieved: f64,
        requested: f64,
        partial: Option<(f64, f64)>,
    },

    #[error("internal consistency violation: {0}")]
    InternalConsistency(String),

    #[error("degenerate pairing: {0}")]
    Degeneracy(String),

    #[error("out of built range: {0}")]
    Range(String),

    #[error("kernel truncation degree {available} too low: need at least {required}")]
    TruncationTooLow { available: usize, required: usize },

    #[error("expansion degree overflow: need degree {required}, cap is {cap}")]
    DegreeOverflow { required: usize, cap: usize },

    #[error("exact operation on floating-regime data: {0}")]
    FloatingRegime(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DunklError>;
