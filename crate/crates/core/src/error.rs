use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("distribution has no positive mass")]
    AllZero,
    #[error("negative mass {value} at cell {index}")]
    NegativeMass { index: usize, value: f64 },
    #[error("non-finite mass at cell {index}")]
    NonFinite { index: usize },
    #[error("shape mismatch: dims {dims:?} imply {expected} cells, got {got}")]
    ShapeMismatch {
        dims: [usize; 3],
        expected: usize,
        got: usize,
    },
    #[error("internal consistency violated: {quantity} = {value}")]
    Inconsistent { quantity: &'static str, value: f64 },

    #[error("unknown PID method `{0}`")]
    UnknownMethod(String),
    #[error("PID method `{0}` is reserved but not implemented")]
    UnsupportedMethod(&'static str),
    #[error(
        "BROJA solver did not converge after {iterations} iterations (gap {gap:e}, objective {objective})"
    )]
    NonConvergence {
        iterations: usize,
        gap: f64,
        objective: f64,
        best: Box<crate::pid::BrojaSolution>,
    },
    #[error("output entropy is zero; spectrum cannot be normalized")]
    ZeroEntropyOutput,

    #[error("correlation must satisfy |d| < 1, got {0}")]
    InvalidCorrelation(f64),
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown scenario {0}; expected 1..=4")]
    UnknownScenario(u8),
    #[error("unknown transfer function `{0}`")]
    UnknownTransfer(String),
    #[error("unknown input model `{0}`")]
    UnknownModel(String),

    #[error("too few {sign} values for sign binning: {count} < {needed}")]
    DegenerateSign {
        sign: &'static str,
        count: usize,
        needed: usize,
    },
    #[error("too few values for quantile binning: {count} < {needed}")]
    TooFewValues { count: usize, needed: usize },
    #[error("tied quantile boundaries; cannot form {bins} distinct bins")]
    TiedBoundaries { bins: usize },
    #[error("unsupported bin count {bins} for {strategy} binning")]
    InvalidBinCount { bins: usize, strategy: &'static str },
    #[error("sample batch has no simulated outputs")]
    MissingOutputs,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cell {cell} failed: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },
    #[error("no result row for cell {0}")]
    MissingCell(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Innermost error, looking through [`Error::Cell`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Cell { source, .. } => source.root(),
            other => other,
        }
    }
}
