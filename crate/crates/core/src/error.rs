use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the analytic formulas, the simulator and the config layer.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// Queue utilization at or beyond the stability boundary.
    #[error("unstable queue: rho = {rho} (need rho < 1)")]
    Unstable { rho: f64 },

    /// A loss probability of one makes every age formula diverge.
    #[error("loss probability is 1: no update is ever delivered")]
    CertainLoss,

    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Detector table has no curve for the requested packet size.
    #[error("no detector curve for packet size {requested}; available sizes: {available:?}")]
    UnknownPacketSize { requested: u32, available: Vec<u32> },

    /// A config document violated an invariant.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Sweep aborted at a specific grid point.
    #[error("sweep failed at {parameter} = {value}: {source}")]
    SweepPoint {
        parameter: String,
        value: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag, used by the CLI error summary.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Unstable { .. } => "unstable",
            Error::CertainLoss => "certain_loss",
            Error::Numeric(_) => "numeric",
            Error::UnknownPacketSize { .. } => "lookup",
            Error::Invalid { .. } => "validation",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
            Error::SweepPoint { .. } => "sweep",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        // serde_json appends " at line L column C"; strip it since we carry both.
        let message = match message.rfind(" at line ") {
            Some(idx) => message[..idx].to_string(),
            None => message,
        };
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}
