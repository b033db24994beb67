use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("symbol {symbol} outside alphabet of size {q}")]
    SymbolOutOfRange { symbol: u8, q: usize },

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("target infeasible: {0}")]
    Infeasible(String),

    #[error("bound inapplicable: {0}")]
    Inapplicable(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("bound violated: {0}")]
    BoundViolation(String),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI and the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Overflow(_) => "overflow",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::SymbolOutOfRange { .. } => "symbol_out_of_range",
            Error::InvalidCode(_) => "invalid_code",
            Error::Hypothesis(_) => "hypothesis",
            Error::Infeasible(_) => "infeasible",
            Error::Inapplicable(_) => "inapplicable",
            Error::Budget(_) => "budget",
            Error::BoundViolation(_) => "bound_violation",
            Error::Format(_) => "format",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => { $crate::error::Error::InvalidParameter(format!($($arg)*)) };
}
pub(crate) use invalid;
