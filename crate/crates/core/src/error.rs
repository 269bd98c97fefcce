use alloc::string::String;

/// Errors raised by the library.
///
/// `NoSolution` results of the harmonic shooter are not errors; see
/// [`criticality::HarmonicShot`](crate::criticality::HarmonicShot).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("latitude s = {s} is outside the open chart (0, π/2)")]
    Domain { s: f64 },
    #[error("metric is degenerate at s = {s}: {what}")]
    DegenerateMetric { s: f64, what: &'static str },
    #[error("invalid charge (k, l) = ({k}, {l}): {what}")]
    InvalidCharge { k: i64, l: i64, what: &'static str },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("solver did not converge: {0}")]
    Convergence(String),
    #[error("boundary mismatch: achieved alpha(pi/2) = {achieved}")]
    BoundaryMismatch { achieved: f64 },
    #[error("division by a near-zero derivative at s = {s} (alpha' = {value})")]
    DivisionNearZero { s: f64, value: f64 },
    #[error("grid too coarse: {interior} interior nodes, need at least {required}")]
    GridTooCoarse { interior: usize, required: usize },
    #[error("line search failed at step {step}: {what}")]
    LineSearch { step: usize, what: String },
}

pub type Result<T> = core::result::Result<T, Error>;
