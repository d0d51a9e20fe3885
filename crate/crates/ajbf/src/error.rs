//! Crate-wide error type.

/// Errors produced by scenario construction, estimation, solvers and the
/// experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value violates a documented invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A virtual angle fell outside [-1, 1].
    #[error("virtual angle {0} outside [-1, 1]")]
    AngleOutOfRange(f64),

    /// A matrix that must be positive semidefinite has a negative eigenvalue
    /// too large to attribute to roundoff.
    #[error("matrix not PSD: min eigenvalue {min_eig:e} against max {max_eig:e}")]
    NotPsd { min_eig: f64, max_eig: f64 },

    /// A linear solve or decomposition failed beyond repair.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Operands with incompatible dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Quantizer resolution outside the supported 1..=5 bit table.
    #[error("unsupported quantizer resolution: {0} bits")]
    QuantBits(u32),

    /// File or process level i/o failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file (experiment spec, results table, export).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
