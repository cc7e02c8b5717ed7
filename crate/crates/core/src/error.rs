use thiserror::Error;

use crate::model::Group;

/// Parameter invariant that failed validation.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ParamViolation {
    #[error("p out of open interval (0, 1): {0}")]
    POutOfRange(f64),
    #[error("{0}.cost: cost equals 1")]
    CostEqualsOne(Group),
    #[error("{0}.cost: cost must be positive, got {1}")]
    CostNotPositive(Group, f64),
    #[error("{0}.cost: cost above 1 makes the risky action dominated, got {1}")]
    CostAboveOne(Group, f64),
    #[error("{0}.pi: probability out of [0, 1]: {1}")]
    PiOutOfRange(Group, f64),
    #[error("{0}.homophily: probability out of [0, 1]: {1}")]
    HomophilyOutOfRange(Group, f64),
    #[error("{0}.degree: degree must be at least 1")]
    DegreeZero(Group),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(#[from] ParamViolation),

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("tally inconsistent with degree {degree}: nB + nG + nZero = {total}")]
    TallyDegree { degree: u32, total: u32 },

    #[error("signal profile has probability zero under every state")]
    OffPath,

    #[error("continuum of steady states (pi = 1 and degree = 1)")]
    ContinuumOfSteadyStates,

    #[error("degenerate log base: pi_b must lie strictly inside (0, 1), got {0}")]
    DegenerateLogBase(f64),

    #[error("fixed point is not regular: {0}")]
    NonRegular(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid cost/value model: {0}")]
    InvalidModel(String),

    #[error("previous generation of group {0} is empty")]
    EmptyGeneration(Group),
}

pub type Result<T> = std::result::Result<T, Error>;
