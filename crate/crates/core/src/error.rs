use thiserror::Error;

use crate::decomp::CpFactors;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index:?} out of range for {modes} modes")]
    InvalidIndex { index: Vec<usize>, modes: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("dense size {size} exceeds guard {limit}")]
    SizeGuardExceeded { size: u128, limit: u128 },

    #[error("rank search exhausted at rank cap {rank_cap}{}: best eps_F {achieved:.3e} > target {target:.3e}",
        tensor.as_ref().map(|t| format!(" for tensor {t}")).unwrap_or_default())]
    RankSearchExhausted {
        tensor: Option<String>,
        rank_cap: usize,
        target: f64,
        achieved: f64,
        best: Box<CpFactors>,
    },

    #[error("operator is empty (cutoff d must be >= 1)")]
    EmptyOperator,

    #[error("invalid error budget: {0}")]
    InvalidBudget(String),

    #[error("no tensors to decompose (tensor count must be positive)")]
    NoTensorsToDecompose,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors raised by a size guard.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::SizeGuardExceeded { .. })
    }

    /// True for errors caused by malformed input files.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::InvalidModel(_))
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl ToString) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.to_string(),
        }
    }
}
