use thiserror::Error;

/// Errors raised by measure construction and the geometric operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("atom weight must be positive, got {0}")]
    NonPositiveWeight(f64),
    #[error("weights sum to {0}, more than 1e-9 away from 1")]
    WeightSumOutOfTolerance(f64),
    #[error("level {0} outside the open unit interval")]
    LevelOutOfRange(f64),
    #[error("measures live on different domains or the operation is not defined on this domain")]
    DomainMismatch,
    #[error("({orientation}, {offset}) is not an isometry of [0,1]")]
    InvalidIntervalIsometry { orientation: i8, offset: f64 },
    #[error("two-point chart needs at most 2 atoms, got {0}")]
    TooManyAtoms(usize),
    #[error("order p must be finite and >= 1 (or > 1 where stated), got {0}")]
    InvalidP(f64),
    #[error("finite-difference step invalid: t={t}, h={h}")]
    StepOutOfRange { t: f64, h: f64 },
    #[error("interpolation parameter {0} outside the monotone range")]
    NotMonotone(f64),
    #[error("descriptor applied outside its scope: {0}")]
    ScopeMismatch(String),
    #[error("operation needs two distinct measures")]
    EqualEndpoints,
    #[error("pair is not bisectable (alpha_2 = alpha_4 = 0)")]
    NotBisectable,
    #[error("positions must be sorted ascending")]
    UnsortedPositions,
    #[error("position {0} outside [0,1]")]
    PositionOutOfRange(f64),
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    AlphaOutOfRange(f64),
    #[error("convex weights invalid: {0}")]
    WeightError(String),
    #[error("M_n element needs 2^n positions, got {0}")]
    InvalidLadderSize(usize),
    #[error("|q| = {0} exceeds the supported bound 30")]
    QOutOfRange(f64),
    #[error("grid needs at least 2 levels")]
    GridTooSmall,
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),
    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
