use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hilbert space dimension {0} exceeds the supported maximum of {1}")]
    DimensionCap(usize, usize),

    #[error("subsystem {index} is not a qubit (dimension {dim})")]
    NotAQubit { index: usize, dim: usize },

    #[error("state has no polarization subsystem to project")]
    MissingPolarization,

    #[error("photon number above {max} in mode {mode}")]
    PhotonNumberOverflow { mode: usize, max: usize },

    #[error("tomography settings are incomplete: {0}")]
    IncompleteSettings(String),

    #[error("fit did not produce a usable result: {0}")]
    DegenerateFit(String),

    #[error("inconsistent timing: {0}")]
    InconsistentTiming(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}
