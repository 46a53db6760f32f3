use alloc::string::String;

use crate::boundary::DomainViolation;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("site sets overlap at vertex `{0}`")]
    OverlappingSites(String),

    #[error("vertex `{0}` listed more than once")]
    DuplicateSite(String),

    #[error("vertex `{0}` is not among the operator's sites")]
    MissingSite(String),

    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("operators live on different site lists")]
    SiteListMismatch,

    #[error("operator is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("edge endpoints coincide at `{0}`")]
    SameSite(String),

    #[error("parameter `{name}` must be positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("point ({x}, {y}) is outside the domain x > y >= 0")]
    OutsideDomain { x: f64, y: f64 },

    #[error(transparent)]
    Domain(#[from] DomainViolation),

    #[error("ratio bound needs y > 0")]
    RatioNotApplicable,

    #[error("dense volume with {sites} sites exceeds the limit of {limit}; use the transfer engine")]
    Infeasible { sites: usize, limit: usize },

    #[error("level {n} exceeds the transfer engine limit of {limit}")]
    LevelTooDeep { n: usize, limit: usize },

    #[error("observable reaches level {level} but the volume is Λ_{n}")]
    SupportExceedsVolume { level: usize, n: usize },

    #[error("boundary condition has no matrix for level {0}")]
    MissingLevel(usize),

    #[error("invalid vertex syntax `{0}`")]
    InvalidVertex(String),
}

pub type Result<T> = core::result::Result<T, Error>;
