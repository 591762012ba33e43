use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulation kernels, the environment and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input current {value} on neuron {neuron}")]
    NonFiniteInput { neuron: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("empty or inverted window [{t0}, {t1}]")]
    EmptyWindow { t0: f64, t1: f64 },

    #[error("inhibitory proportion {0} is outside [0, 1]")]
    InvalidProportion(f64),

    #[error("cell ({x}, {y}) is outside the {width}x{height} grid")]
    OutOfBounds {
        x: i64,
        y: i64,
        width: usize,
        height: usize,
    },

    #[error("episode already finished at step {0}")]
    EpisodeFinished(usize),

    #[error("no valid layout after {attempts} samples: {last_reason}")]
    NoValidLayout { attempts: usize, last_reason: String },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("cell {to:?} is unreachable from {from:?}")]
    Unreachable { from: (usize, usize), to: (usize, usize) },

    #[error("altruistic preference undefined: da + r_self = 0")]
    ZeroDenominator,

    #[error("duplicate inhibitory proportion {0} in sweep")]
    DuplicateProportion(f64),

    #[error("sweep needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported snapshot version {found} (expected {expected})")]
    SnapshotVersion { found: u32, expected: u32 },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
