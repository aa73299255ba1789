use thiserror::Error;

/// Errors raised by the library. Planner infeasibility and inconclusive
/// identification are ordinary outcomes and are not represented here.
#[derive(Debug, Error, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    #[error("joint vector has length {got}, robot has {expected} joints")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported number of joints {0}: only 3R and 6R arms are handled")]
    UnsupportedDof(usize),
    #[error("joint axis {0} has zero length")]
    ZeroAxis(usize),
    #[error("joint {0} has lower limit not below upper limit")]
    InvalidLimits(usize),
    #[error("expected {expected} offset vectors, got {got}")]
    OffsetCount { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("weight matrix must be {n}x{n} symmetric positive definite")]
    NotPositiveDefinite { n: usize },
    #[error("configurations do not reach the same pose (position error {position}, orientation error {orientation})")]
    PoseMismatch { position: f64, orientation: f64 },
    #[error("operation requires a 3-DOF robot")]
    RequiresThreeDof,
    #[error("invalid task path: {0}")]
    InvalidPath(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("start and end solution sets of the closed path do not match: {0}")]
    EndpointMismatch(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("no feasible start found after {attempts} attempts ({infeasible} infeasible placements)")]
    NoFeasibleStart { attempts: usize, infeasible: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
