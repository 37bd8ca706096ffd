use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid simplex: {0}")]
    InvalidSimplex(String),

    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),

    #[error("no boundary below dimension 0")]
    NoBoundaryBelowZero,

    #[error("birth undefined for zero chain")]
    ZeroChainBirth,

    #[error("dispersion undefined for zero chain")]
    ZeroChainDispersion,

    #[error("simplex {0} not in filtration")]
    UnknownSimplex(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("window exceeds series")]
    WindowExceedsSeries,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty point cloud")]
    EmptyCloud,

    #[error("simplex count {count} exceeds cap {cap}")]
    TooManySimplices { count: usize, cap: usize },

    #[error("no simplices alive")]
    NoSimplicesAlive,

    #[error("initial representative is not a cycle")]
    NotACycle,

    #[error("chain support not contained in restricted simplex set")]
    SupportOutsideRestriction,

    #[error("no signed lift of the cycle found: {0}")]
    OrientationLift(String),

    #[error("reduction matrix V not tracked for dimension {0}")]
    VNotTracked(usize),

    #[error("oracle enumeration too large: |Q| = {0} exceeds {1}")]
    OracleTooLarge(usize, usize),

    #[error("solver stalled after {0} pivots")]
    SolverStalled(usize),

    #[error("solver failed: {0}")]
    SolverFailed(String),

    #[error("relaxation undefined: {0}")]
    Relaxation(String),

    #[error("io: {0}")]
    Io(String),

    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
