use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A candidate column lies (numerically) in the span of the current basis.
    #[error("column {index} is numerically dependent on the current basis (relative residual {relative_residual:.3e})")]
    RankDeficient { index: usize, relative_residual: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("{0}")]
    Capability(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("selection failed: {0}")]
    Selection(String),

    #[error("noise estimation failed: {0}")]
    NoiseEstimation(String),

    /// The noise estimate is zero; callers may fall back to cross-validation.
    #[error("degenerate noise estimate: {0}")]
    DegenerateNoise(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("covariance matrix is not positive definite: {0}")]
    Covariance(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Selection(_) | Error::NoiseEstimation(_) | Error::DegenerateNoise(_) => 3,
            Error::Numerical(_) | Error::Singular(_) | Error::RankDeficient { .. } => 4,
            _ => 2,
        }
    }
}
