use std::fmt;

use thiserror::Error;

/// A single schema violation found while validating a config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    /// Dotted key path, e.g. `noise.segments[2].duration`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("length mismatch: {left} samples vs {right} samples")]
    LengthMismatch { left: usize, right: usize },

    #[error("noise schedule: {0}")]
    Schedule(String),

    #[error("lag pair (ell={ell}, j={j}) out of range for window reaching back {available} samples")]
    LagOutOfRange { ell: usize, j: usize, available: usize },

    #[error("t = {t} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("unknown engine kind `{0}` (expected one of: adaptive, fd, red)")]
    UnknownKind(String),

    #[error("horizon {horizon} s is shorter than the certified instant {needed} s")]
    HorizonTooShort { horizon: f64, needed: f64 },

    #[error("signal leaves its class: {0}")]
    Membership(String),

    #[error("config validation failed ({} issue(s))", .0.len())]
    Config(Vec<ConfigIssue>),

    #[error("config parse error: {0}")]
    ConfigSyntax(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam { name, reason: reason.into() }
}
