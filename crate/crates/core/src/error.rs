use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("cost matrix is not square: {rows} rows, row {row} has {cols} columns")]
    NonSquare { rows: usize, row: usize, cols: usize },

    #[error("cost matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    /// The elevation-angle equation has no sign change for this environment.
    #[error("no optimal elevation angle for environment {label:?} (a={a}, b={b}, eta_los={eta_los}, eta_nlos={eta_nlos})")]
    NoRoot {
        label: String,
        a: f64,
        b: f64,
        eta_los: f64,
        eta_nlos: f64,
    },

    /// Configuration or scenario failed validation.
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
