//! Crate-wide error type for the analysis modules. Parse diagnostics live
//! in [`crate::dsl`] and are wrapped here when they cross module lines.

use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("{0}")]
    Parse(String),

    #[error("system is not in triangular form: equation for {state} must read D({state}) = {control}")]
    NotInTriangularForm { state: String, control: String },

    #[error("no admissible point found in the sampling region after {attempts} attempts")]
    RegionExhausted { attempts: u32 },

    #[error("point does not lie on the system fiber: residual {index} is nonzero")]
    PointNotOnFiber { index: usize },

    #[error("direction vector is zero")]
    ZeroDirection,

    #[error("domain constraint violated at t = {t}")]
    DomainViolated { t: f64 },

    #[error("integration step produced a non-finite value at t = {t}")]
    StepUnstable { t: f64 },

    #[error("trajectory passed within {value:e} of a singular locus at t = {t}")]
    SingularLocusHit { t: f64, value: f64 },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("not enough samples for a verdict: needed {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("prolongation order {requested} exceeds the configured limit {limit}")]
    ProlongationOrderExceeded { requested: u32, limit: u32 },

    #[error("invalid system {name}: {reason}")]
    BadSystem { name: String, reason: String },

    #[error("invalid map {name}: {reason}")]
    BadMap { name: String, reason: String },

    #[error("invalid certificate {name}: {reason}")]
    BadCertificate { name: String, reason: String },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
