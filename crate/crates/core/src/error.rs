use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("sample {sample}: amplitude bound not met after {retries} retries")]
    AmplitudeAssumption { sample: u64, retries: u32 },

    #[error("Wood anomaly: order {order} has |beta| = {beta_abs:.3e}")]
    WoodAnomaly { order: i64, beta_abs: f64 },

    #[error("field point too close to source line: |y - t| = {separation:.3e}")]
    Proximity { separation: f64 },

    #[error("mode series did not converge within {max_order} orders")]
    SeriesNotConverged { max_order: i64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("rank-deficient least-squares system: rank {rank} of {columns}")]
    RankDeficient { rank: usize, columns: usize },

    #[error("objective became non-finite at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("dataset incomplete: {0}")]
    DatasetIncomplete(String),

    #[error("unsupported dataset format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("sign consensus is ambiguous: {0}")]
    Ambiguity(String),

    #[error("{failed} of {total} samples failed to invert")]
    TooManyFailures { failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse classification used for process exit codes and FFI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numerical,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::VersionMismatch { .. } | Error::LengthMismatch { .. } => {
                ErrorKind::Config
            }
            Error::Json(_) | Error::Io(_) | Error::Csv(_) | Error::DatasetIncomplete(_) => {
                ErrorKind::Io
            }
            _ => ErrorKind::Numerical,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
