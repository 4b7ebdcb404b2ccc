use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid Schatten index p = {0} (need 0 < p <= inf)")]
    InvalidIndex(f64),

    #[error("unsupported index p = {0}: Schur multiplier paths need 0 < p <= 1")]
    UnsupportedIndex(f64),

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("index {index} out of range for dimension {dim}")]
    OutOfRange { index: usize, dim: usize },

    #[error("empty matrix")]
    Empty,

    #[error("node separation violated: |{lambda} - {mu}| < {delta}")]
    Separation { lambda: f64, mu: f64, delta: f64 },

    #[error("function is not finite at t = {0}")]
    NonFinite(f64),

    #[error("vector is not a unit vector (norm {0})")]
    NotUnit(f64),

    #[error("wavelet order {0} outside 1..=20")]
    WaveletOrder(usize),

    #[error("resolution {requested} exceeds the cascade cap {cap}")]
    Resolution { requested: u32, cap: u32 },

    #[error("t = {t} outside the domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("aliasing check failed: {share:.3e} of the energy sits in the top octave")]
    Aliasing { share: f64 },

    #[error("degenerate offset: f(eps) = f(0) for eps = {0}")]
    DegenerateOffset(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by the caller (bad arguments, violated preconditions)
    /// rather than by a numerical or I/O failure.
    pub fn is_usage(&self) -> bool {
        !matches!(self, Error::Numerical(_) | Error::Io(_) | Error::Json(_))
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
