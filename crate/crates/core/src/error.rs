use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("diagonal entry {index} is not exactly 1")]
    NonUnitDiagonal { index: usize },

    #[error("extension column is infeasible: {0}")]
    InfeasibleColumn(String),

    #[error("leading {dim}x{dim} block has rank {rank}; reorder rows so a full basis comes first")]
    RankDeficientBasis { dim: usize, rank: usize },

    #[error("rank {rank} exceeds the ambient dimension {dim}")]
    RankExceedsDim { dim: usize, rank: usize },

    #[error("tangent system is rank deficient (rank {rank}, need {needed})")]
    RankDeficient { rank: usize, needed: usize },

    #[error("matrix is not positive semidefinite")]
    NotPsd,

    #[error("entry {0} is floating point but an exact rational was required")]
    MixedModeEntries(String),

    #[error("cannot parse scalar {0:?}")]
    ParseScalar(String),

    #[error("row {index} is protected and cannot be deleted")]
    ProtectedRow { index: usize },

    #[error("index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("candidate list is empty")]
    EmptyCandidates,

    #[error("vector {index} has norm error {error:.3e}")]
    NonUnitVector { index: usize, error: f64 },

    #[error("cosine {value} between rows {row} and {col} exceeds 1/2")]
    CosineCapViolation { row: usize, col: usize, value: f64 },

    #[error("invalid seed configuration: {0}")]
    InvalidSeed(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),

    #[error("reward {reward} exceeds the known optimum {optimum} in dimension {dim}")]
    SoundnessViolation { dim: usize, reward: usize, optimum: usize },

    #[error("checkpoint integrity failure: {0}")]
    CorruptCheckpoint(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
