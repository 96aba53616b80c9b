use thiserror::Error;

use crate::dirichlet::ZeroCountError;
use crate::gray::GrayError;
use crate::measure::MeasureError;
use crate::olsen::OlsenError;
use crate::space::SpaceError;
use crate::tangency::TangencyError;

/// Crate-level error. Each module has its own error type; this one lets
/// callers (the CLI in particular) handle them uniformly.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Space(#[from] SpaceError),

    #[error(transparent)]
    Measure(#[from] MeasureError),

    #[error(transparent)]
    Zeros(#[from] ZeroCountError),

    #[error(transparent)]
    Olsen(#[from] OlsenError),

    #[error(transparent)]
    Tangency(#[from] TangencyError),

    #[error(transparent)]
    Gray(#[from] GrayError),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of an iterative method or a certificate, as opposed
    /// to rejected input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Olsen(e) => e.is_numeric(),
            Error::Tangency(e) => e.is_numeric(),
            _ => false,
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Space(_) => "space",
            Error::Measure(_) => "measure",
            Error::Zeros(_) => "zeros",
            Error::Olsen(_) => "olsen",
            Error::Tangency(_) => "tangency",
            Error::Gray(_) => "gray",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
