use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("perturbation failed: {0}")]
    PerturbationFailed(String),
    #[error("spectral failure: {0}")]
    SpectralFailure(String),
    #[error("undefined gap: {0}")]
    UndefinedGap(String),
    #[error("functional is not in the interior of the dual cone: {0}")]
    NotInDualCone(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate cone: {0}")]
    DegenerateCone(String),
    #[error("root not bracketed: {0}")]
    BracketFailure(String),
    #[error("functional is not on the boundary of the dual body: {0}")]
    NotOnBoundary(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse error classes, used for process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    File,
    Precondition,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io(_) | Error::Parse(_) => ErrorClass::File,
            Error::InvalidParameter(_)
            | Error::InvalidInput(_)
            | Error::NotInDualCone(_)
            | Error::NotOnBoundary(_)
            | Error::UndefinedGap(_) => ErrorClass::Precondition,
            Error::PerturbationFailed(_)
            | Error::SpectralFailure(_)
            | Error::InsufficientData(_)
            | Error::DegenerateCone(_)
            | Error::BracketFailure(_) => ErrorClass::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
