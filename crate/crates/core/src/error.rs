use thiserror::Error;

use crate::model::{Param, SystemId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown system id `{0}` (expected one of A, B, C, D, E)")]
    UnknownSystem(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parameter `{param}` is not used by system {system}")]
    NotApplicable { param: Param, system: SystemId },
    #[error("parameter `{param}` is fixed by the definition of system {system}")]
    FixedByPreset { param: Param, system: SystemId },
    #[error("parameter `{0}` is absent from this model")]
    AbsentParameter(Param),
    #[error("parameter `{param}` is invalid: {reason}")]
    InvalidParameter { param: Param, reason: &'static str },
    #[error("right-hand side is not finite at the given state")]
    NonFinite,
    #[error("state is not a fixed point (residual {residual:e})")]
    NotAFixedPoint { residual: f64 },
    #[error("fixed points by elimination need rational rate functions")]
    NotRational,
    #[error("config: {0}")]
    Config(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("h(v) is not of the form v^2 (A v^2 + B): mismatch {mismatch:e} at v = {v}")]
    HopfCurveStructure { v: f64, mismatch: f64 },
    #[error("not a Hopf configuration: b3/b1 = {ratio}")]
    NotHopf { ratio: f64 },
    #[error("critical speed must be nonzero")]
    ZeroCriticalSpeed,
    #[error("no complex eigenvalue pair on the imaginary axis at v = {v0}")]
    NoComplexPair { v0: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid integration options: {0}")]
    InvalidOptions(&'static str),
    #[error("step size underflow at zeta = {zeta} (h = {step:e}); the problem looks stiff")]
    StepSizeUnderflow { zeta: f64, step: f64 },
    #[error("transient fraction {0} outside [0, 0.9]")]
    InvalidTransient(f64),
    #[error("trajectory has no samples")]
    EmptyTrajectory,
    #[error("only {found} peaks after transient removal, need at least {needed}")]
    TooFewPeaks { found: usize, needed: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("series too short: {len} samples, need at least {required}")]
    SeriesTooShort { len: usize, required: usize },
    #[error("series contains non-finite values")]
    NonFinite,
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("segment length {0} is not a power of two")]
    SegmentLength(usize),
    #[error("embedding dimension {0} not supported (use 2, 3 or 4)")]
    EmbeddingDimension(usize),
    #[error("need at least {required} points, got {len}")]
    TooFewPoints { len: usize, required: usize },
}

/// Umbrella error for callers that drive whole pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}
