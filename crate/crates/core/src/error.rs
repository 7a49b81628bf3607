use std::path::PathBuf;

use crossind_tensor::TensorError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Tensor(#[from] TensorError),

    #[error("cutoff {cutoff} Hz outside (0, {nyquist}) Hz")]
    CutoffOutOfRange { cutoff: f64, nyquist: f64 },

    #[error("{op}: series of length {len} is shorter than the required {min}")]
    SeriesTooShort { op: &'static str, len: usize, min: usize },

    #[error("invalid motion: {0}")]
    InvalidMotion(String),

    #[error("no detectable release: throwing wrist never moves")]
    NoRelease,

    #[error("recording too short: {missing_s:.3} s missing {side} release (needs {needed_s:.3} s)")]
    InsufficientCoverage {
        side: &'static str,
        needed_s: f64,
        missing_s: f64,
    },

    #[error("motion is already right-handed; refusing to mirror twice")]
    AlreadyRightHanded,

    #[error("{path}: line {line}, field `{field}`: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        field: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("pitchers with fewer than {required} pitches: {pitchers:?}")]
    TooFewPitches { required: usize, pitchers: Vec<String> },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("graph restricted to the active joints is empty")]
    EmptySubgraph,

    #[error("input dimensions {got:?} do not match model dimensions {expected:?}")]
    InputDims { expected: Vec<usize>, got: Vec<usize> },

    #[error("duplicate pitcher id `{0}`")]
    DuplicatePitcher(String),

    #[error("pitcher `{0}` is missing")]
    MissingPitcher(String),

    #[error("non-finite loss {loss} at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize, loss: f64 },

    #[error("R² undefined: all truths are identical")]
    DegenerateTruths,

    #[error("{0}")]
    Statistics(String),

    #[error("competitive level {0} has no pitchers")]
    MissingLevel(String),

    #[error("fold for pitcher `{pitcher}`: {source}")]
    Fold {
        pitcher: String,
        #[source]
        source: Box<Error>,
    },

    #[error("ablation cell ({region}, window {window}, repeat {repeat}): {source}")]
    Ablation {
        region: String,
        window: usize,
        repeat: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{file}: {source}")]
    Pitch {
        file: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("partition violated: {0}")]
    Leakage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
