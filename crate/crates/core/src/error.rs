use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed code: {0}")]
    MalformedCode(String),
    #[error("not a knot: traversal covers {covered} of {total} arcs")]
    NotAKnot { covered: usize, total: usize },
    #[error("non-planar: {faces} faces for {crossings} crossings")]
    NonPlanar { faces: usize, crossings: usize },
    #[error("no base point: every underpass is followed by an overpass of the same crossing")]
    NoBasePoint,
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("integrality violation: {0}")]
    IntegralityViolation(String),
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("zero binding for variable {0}")]
    ZeroBinding(String),
    #[error("pole hit while evaluating")]
    PoleHit,
    #[error("branch ambiguity: half-integer exponent remains")]
    BranchAmbiguity,
    #[error("pole at q = 1")]
    PoleAtOne,
    #[error("residual q in expression")]
    ResidualQ,
    #[error("non-integral exponent: {0}")]
    NonIntegralExponent(String),
    #[error("inconsistent q* calibration: {0}")]
    InconsistentQStar(String),
    #[error("match failure for {generator}: {detail}")]
    MatchFailure { generator: String, detail: String },
    #[error("insufficient data: have {have} values, need at least {need}")]
    InsufficientData { have: usize, need: usize },
    #[error("no convergence")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, Error>;
