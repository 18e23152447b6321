//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors reported by estimation, data handling, and numeric kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of a basis or mixture function.
    Domain { what: &'static str, value: f64 },
    /// Basis index out of range (`j > m`).
    BasisIndex { degree: usize, index: usize },
    /// Simplex weights are invalid (negative entry, wrong length, or sum far from one).
    InvalidWeights(&'static str),
    /// An observation violates the censoring-interval invariants.
    InvalidObservation { index: usize, reason: &'static str },
    /// Covariate vectors of mixed dimension in one dataset.
    CovariateDimension { expected: usize, found: usize, index: usize },
    /// Mismatch between a covariate vector and the fitted model.
    DimensionMismatch { expected: usize, found: usize },
    /// A user-supplied truncation time does not exceed the largest finite endpoint.
    TauTooSmall { tau: f64, max_endpoint: f64 },
    /// Operation requires a truncation time that has not been selected yet.
    TauNotSelected,
    /// Operation requires rescaled data (all finite endpoints in [0, 1]).
    NotRescaled,
    /// Dataset contains no observations.
    EmptyDataset,
    /// The likelihood is degenerate (-inf) at the requested starting point.
    DegenerateStart,
    /// Every degree on the selection grid failed to fit.
    AllDegreesFailed,
    /// Too few degrees succeeded to run the change-point selector.
    TooFewDegrees { succeeded: usize },
    /// Invalid fit configuration (tolerances, grid bounds, iteration caps).
    InvalidConfig(&'static str),
    /// Invalid simulation design parameter.
    InvalidDesign(&'static str),
    /// Right-censoring calibration failed to bracket the target rate.
    CalibrationBracket { target: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::BasisIndex { degree, index } => {
                write!(f, "basis index {index} exceeds degree {degree}")
            }
            Error::InvalidWeights(reason) => write!(f, "invalid simplex weights: {reason}"),
            Error::InvalidObservation { index, reason } => {
                write!(f, "observation {index}: {reason}")
            }
            Error::CovariateDimension { expected, found, index } => write!(
                f,
                "observation {index} has {found} covariates, expected {expected}"
            ),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::TauTooSmall { tau, max_endpoint } => write!(
                f,
                "truncation time {tau} must exceed the largest finite endpoint {max_endpoint}"
            ),
            Error::TauNotSelected => write!(f, "truncation time has not been selected"),
            Error::NotRescaled => write!(f, "dataset must be rescaled to [0, 1] first"),
            Error::EmptyDataset => write!(f, "no observations"),
            Error::DegenerateStart => {
                write!(f, "log-likelihood is -inf at the requested starting point")
            }
            Error::AllDegreesFailed => write!(f, "all degrees on the grid failed to fit"),
            Error::TooFewDegrees { succeeded } => write!(
                f,
                "only {succeeded} degree(s) fitted; need at least 2 for degree selection"
            ),
            Error::InvalidConfig(reason) => write!(f, "invalid fit configuration: {reason}"),
            Error::InvalidDesign(reason) => write!(f, "invalid simulation design: {reason}"),
            Error::CalibrationBracket { target } => {
                write!(f, "cannot bracket censoring rate {target}")
            }
        }
    }
}

impl core::error::Error for Error {}

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// A string message paired with enough context to act on it.
///
/// Collected in [`crate::optimizer::Diagnostics`] rather than logged, so the
/// crate stays silent and `no_std`-friendly.
pub type Warning = String;
