//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension {n} exceeds the cap {cap} for {what}")]
    DimensionTooLarge { what: &'static str, n: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },

    #[error("photon number mismatch: input carries {input} photons, output {output}")]
    PhotonNumberMismatch { input: usize, output: usize },

    #[error("negative entry {value} at ({row}, {col}); a non-negative matrix is required")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("denominator vanishes: {what}")]
    ZeroDenominator { what: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("incomplete probe set: {0}")]
    IncompleteProbeSet(String),

    #[error("configuration sets differ between the two tables")]
    ConfigurationSetMismatch,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    ///
    /// 2 = schema/validation, 3 = dimension/photon-number mismatch,
    /// 4 = numerical domain.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Json(_) | Error::InvalidParameter(_) | Error::NonFinite { .. } => 2,
            Error::IncompleteProbeSet(_) | Error::ConfigurationSetMismatch => 2,
            Error::NonSquare { .. }
            | Error::DimensionMismatch { .. }
            | Error::PhotonNumberMismatch { .. } => 3,
            Error::DimensionTooLarge { .. }
            | Error::NegativeEntry { .. }
            | Error::ZeroDenominator { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
