use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Axis of a 4-D (x, y, z, time) query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
    T,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
            Axis::T => "time",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{axis} = {value} is outside the domain [{lo}, {hi}]")]
    OutOfDomain {
        axis: Axis,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("({x}, {y}, {z}) is not in navigable water")]
    NotNavigable { x: f64, y: f64, z: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("depth {action} is not in the action set {interval}")]
    InfeasibleAction { action: f64, interval: String },

    #[error("non-finite value at lattice node {node}")]
    NonFinite { node: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
