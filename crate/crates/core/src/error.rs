use std::fmt;

use thiserror::Error;

/// A single failed range check on a protocol parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub parameter: &'static str,
    pub message: String,
}

impl Violation {
    pub fn new(parameter: &'static str, message: impl Into<String>) -> Self {
        Self {
            parameter,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join(.0))]
    Domain(Vec<Violation>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("state intensity {state} does not match operator basis intensity {operator}")]
    IntensityMismatch { state: f64, operator: f64 },

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("no conclusive events (denominator of the error rate is zero)")]
    NoConclusiveEvents,

    #[error("no sign change of the key rate in [{lo} km, {hi} km]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("degenerate objective: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub fn domain(parameter: &'static str, message: impl Into<String>) -> Self {
        Error::Domain(vec![Violation::new(parameter, message)])
    }

    /// True for errors caused by out-of-range or malformed input.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Config(_))
    }

    /// True for errors raised by a numerically degenerate evaluation.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IntensityMismatch { .. }
                | Error::Singular(_)
                | Error::NoConclusiveEvents
                | Error::NoSignChange { .. }
                | Error::Degenerate(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
