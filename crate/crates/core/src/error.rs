//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: no records")]
    EmptyInput { path: PathBuf },

    #[error("row {row}: {msg}")]
    MalformedRow { row: u64, msg: String },

    #[error("row {row}: empty sector list for company {company}")]
    EmptySectorList { row: u64, company: String },

    #[error("row {row}: duplicate company id {company}")]
    DuplicateCompanyId { row: u64, company: String },

    #[error("row {row}: company id {company} lies in the reserved synthetic namespace")]
    ReservedCompanyId { row: u64, company: String },

    #[error("invalid database: {msg}")]
    InvalidDatabase { msg: String },

    #[error("min_support {min_support} outside 1..={n}")]
    MinSupportOutOfRange { min_support: usize, n: usize },

    #[error("vector lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("need at least {need} ratings, got {got}")]
    TooFewRatings { need: usize, got: usize },

    #[error("index {index} out of range for dimension {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("latent dimension {latent} exceeds min(M, N) = {max}")]
    LatentDimensionTooLarge { latent: usize, max: usize },

    #[error("ALS normal equations are singular; use lambda > 0")]
    SingularSystem,

    #[error("invalid parameter {name}: {msg}")]
    InvalidParameter { name: &'static str, msg: String },

    #[error("K must be at least 1")]
    ZeroK,

    #[error("self-pair on sector index {index}")]
    SelfPair { index: usize },

    #[error("duplicate target {target} for source {source_id}")]
    DuplicateTarget { source_id: String, target: String },

    #[error("non-finite score for ({source_id}, {target})")]
    NonFiniteScore { source_id: String, target: String },

    #[error("no synthetic company mapped for sector {sector}")]
    MissingSyntheticCompany { sector: String },

    #[error("no score list passed for combination")]
    NoModelOutputs,

    #[error("no source sector has a labeled relevant target")]
    NoEligibleSource,

    #[error("infeasible synthetic config: {msg}")]
    InfeasibleConfig { msg: String },

    #[error("{path}:{line}: {msg}")]
    MalformedFile {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    #[error("unknown sector id {id}")]
    UnknownSector { id: String },

    #[error("degenerate input: {msg}")]
    DegenerateInput { msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
