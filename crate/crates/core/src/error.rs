use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid resolution: {0}")]
    Resolution(String),

    #[error("invalid series: {0}")]
    Series(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite value produced during {0}")]
    NonFinite(String),

    #[error("invalid network: {0}")]
    Network(String),

    #[error("inconsistent scenario: {0}")]
    Scenario(String),

    #[error("{}", infeasible_message(.window, .class, .detail))]
    Infeasible {
        window: Option<usize>,
        class: ConstraintClass,
        detail: String,
    },

    #[error("LP solver failed in window {window}: {detail}")]
    Solver { window: usize, detail: String },

    #[error("{}: {message}", location(.file, .row))]
    Validation {
        file: PathBuf,
        row: Option<usize>,
        message: String,
    },

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

/// Constraint family of the netting LP, used to classify infeasibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintClass {
    /// AC flow bounds.
    TransmissionLimit,
    /// Per-TP AC energy equality.
    TpEnergy,
    /// Nodal power balance.
    PowerBalance,
    /// Definition of the flow-change terms.
    Smoothing,
}

impl std::fmt::Display for ConstraintClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConstraintClass::TransmissionLimit => "transmission limit",
            ConstraintClass::TpEnergy => "TP energy",
            ConstraintClass::PowerBalance => "power balance",
            ConstraintClass::Smoothing => "flow smoothing",
        })
    }
}

fn infeasible_message(window: &Option<usize>, class: &ConstraintClass, detail: &str) -> String {
    match window {
        Some(w) => format!("infeasible {class} constraint in window {w}: {detail}"),
        None => format!("infeasible {class} constraint: {detail}"),
    }
}

fn location(file: &std::path::Path, row: &Option<usize>) -> String {
    match row {
        Some(r) => format!("{} (row {r})", file.display()),
        None => file.display().to_string(),
    }
}

impl Error {
    /// True for errors caused by malformed or inconsistent input data.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Resolution(_)
                | Error::Series(_)
                | Error::LengthMismatch { .. }
                | Error::Parameter(_)
                | Error::Network(_)
                | Error::Scenario(_)
                | Error::Validation { .. }
                | Error::Parse { .. }
                | Error::Io { .. }
        )
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible { .. })
    }

    pub(crate) fn write(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Write {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
