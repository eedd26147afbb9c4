use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported torus dimension {0} (expected 1 or 2)")]
    UnsupportedDim(usize),

    #[error("grid resolution {resolution} aliases frequencies of cutoff {cutoff} (need at least {})", 2 * .cutoff + 1)]
    Aliasing { resolution: usize, cutoff: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kernel family `{0}` has no closed form; a series cutoff is required")]
    MissingSeriesCutoff(&'static str),

    #[error("malformed coefficient row {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("inconsistent dimensions: {0}")]
    InconsistentDims(String),

    #[error("need at least {needed} positive values, got {got}")]
    TooFewValues { needed: usize, got: usize },

    #[error("singular value decomposition did not converge")]
    SvdFailed,

    #[error("eigenvalue decomposition did not converge")]
    EigenFailed,

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
