//! Error type shared by every module of the crate.
//!
//! The variants mirror the failure modes that actually occur in practice:
//! bad parameter domains, integrands that cannot decay fast enough for the
//! weighted measure, degenerate test functions (some directional derivative
//! vanishes identically), non-finite values produced mid-quadrature, and
//! iterative searches that fail to settle.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    Domain(String),
    /// The integrand's decay exponent is too small for the weighted measure:
    /// `decay` must exceed `needed` for the integral to converge.
    NonIntegrable { decay: f64, needed: f64 },
    /// A test function is numerically degenerate (for example a directional
    /// derivative norm underflows relative to the largest one).
    Degenerate(String),
    /// A NaN or infinity appeared during evaluation; the payload locates it.
    NonFinite(String),
    /// An iterative procedure (maximization, extrapolation) did not converge.
    NoConvergence(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NonIntegrable { decay, needed } => write!(
                f,
                "non-integrable: decay exponent {decay} does not exceed required {needed}"
            ),
            Error::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
            Error::NonFinite(msg) => write!(f, "non-finite value: {msg}"),
            Error::NoConvergence(msg) => write!(f, "no convergence: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
