use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("angle {0} outside [-1, 1]")]
    AngleOutOfRange(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("duplicate path at (aod_bin={aod}, aoa_bin={aoa})")]
    DuplicatePath { aod: usize, aoa: usize },

    #[error("invalid channel state: {0}")]
    InvalidState(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid distribution: {0}")]
    Distribution(String),
}
