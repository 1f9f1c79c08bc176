//! Error types shared across the crate.
//!
//! Validation is collected: every violated constraint is reported, not just
//! the first, so a misconfigured experiment can be fixed in one pass.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// A single violated constraint, naming the offending field.
///
/// Field names use 1-based component indices (`theta[1]` is the first
/// module's detection probability) to match the usual modeling convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub constraint: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            constraint: constraint.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// One or more constraints violated; all of them are listed.
    Validation(Vec<Violation>),
    /// A configured size limit would be exceeded.
    Capacity { required: u128, limit: u128 },
    /// An argument lies outside the mathematical domain of the operation.
    Domain(String),
    /// The requested set is empty.
    Infeasible(String),
    /// The closed-form ellipsoid minimizer left the nonnegative orthant;
    /// `component` is 1-based.
    UnsupportedGeometry { component: usize, value: f64 },
    /// The operation's special-case preconditions do not hold.
    Unsupported(String),
    /// Vector lengths do not agree.
    DimensionMismatch { expected: usize, actual: usize },
}

impl Error {
    /// Convenience constructor for a single-violation validation error.
    pub fn validation(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Validation(alloc::vec![Violation::new(field, constraint)])
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Validation(violations) => {
                write!(f, "validation failed ({} violation(s)):", violations.len())?;
                for v in violations {
                    write!(f, " [{v}]")?;
                }
                Ok(())
            }
            Error::Capacity { required, limit } => {
                write!(f, "capacity exceeded: required {required}, limit {limit}")
            }
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Error::UnsupportedGeometry { component, value } => write!(
                f,
                "worst-case profile component {component} is negative ({value}); \
                 the ellipsoid leaves the probability simplex"
            ),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
