//! Error classification for exit codes: 2 for bad input, 3 for numerical
//! failure.

use std::fmt;
use std::process::ExitCode;

use dsm_core::aperture::ApertureError;
use dsm_core::bie::BieError;
use dsm_core::disk::DiskError;
use dsm_core::farfield::{FarFieldError, FormatError};
use dsm_core::geometry::GeometryError;
use dsm_core::imaging::ImagingError;
use dsm_core::params::ParamsError;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Numerical,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        CliError { kind: Kind::Usage, error: error.into() }
    }

    pub fn numerical(error: impl Into<anyhow::Error>) -> Self {
        CliError { kind: Kind::Numerical, error: error.into() }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self.kind {
            Kind::Usage => EXIT_USAGE,
            Kind::Numerical => EXIT_NUMERICAL,
        })
    }

    pub fn context(self, message: impl fmt::Display + Send + Sync + 'static) -> Self {
        CliError { kind: self.kind, error: self.error.context(message) }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type CliResult<T> = Result<T, CliError>;

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::usage(e)
    }
}

impl From<ParamsError> for CliError {
    fn from(e: ParamsError) -> Self {
        CliError::usage(e)
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::Degenerate { .. } => CliError::numerical(e),
            _ => CliError::usage(e),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::usage(e)
    }
}

impl From<FarFieldError> for CliError {
    fn from(e: FarFieldError) -> Self {
        CliError::usage(e)
    }
}

impl From<DiskError> for CliError {
    fn from(e: DiskError) -> Self {
        match e {
            DiskError::SingularDenominator { .. } | DiskError::TruncationNotReached(_) | DiskError::Special(_) => {
                CliError::numerical(e)
            }
            _ => CliError::usage(e),
        }
    }
}

impl From<BieError> for CliError {
    fn from(e: BieError) -> Self {
        match e {
            BieError::Singular { .. } | BieError::Special(_) | BieError::CoincidentNodes { .. } => {
                CliError::numerical(e)
            }
            BieError::Geometry(GeometryError::Degenerate { .. }) => CliError::numerical(e),
            _ => CliError::usage(e),
        }
    }
}

impl From<ImagingError> for CliError {
    fn from(e: ImagingError) -> Self {
        match e {
            ImagingError::DegenerateField | ImagingError::NonPositiveEnvelope(_) => CliError::numerical(e),
            _ => CliError::usage(e),
        }
    }
}

impl From<ApertureError> for CliError {
    fn from(e: ApertureError) -> Self {
        match e {
            ApertureError::Special(_) => CliError::numerical(e),
            _ => CliError::usage(e),
        }
    }
}
