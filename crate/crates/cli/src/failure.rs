use std::fmt;

use wavetrain_core::error::{DiagnosticsError, IntegrateError, ModelError, StabilityError};

/// Process exit codes.
pub mod code {
    pub const CONFIG: u8 = 1;
    pub const NO_PHYSICAL_FIXED_POINT: u8 = 2;
    pub const INTEGRATOR: u8 = 3;
    pub const DIAGNOSTICS: u8 = 4;
}

/// An error paired with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(code::CONFIG, message)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Self::config(e.to_string())
    }
}

impl From<StabilityError> for Failure {
    fn from(e: StabilityError) -> Self {
        Self::config(e.to_string())
    }
}

impl From<IntegrateError> for Failure {
    fn from(e: IntegrateError) -> Self {
        let code = match e {
            IntegrateError::StepSizeUnderflow { .. } => code::INTEGRATOR,
            _ => code::CONFIG,
        };
        Self::new(code, e.to_string())
    }
}

impl From<DiagnosticsError> for Failure {
    fn from(e: DiagnosticsError) -> Self {
        Self::new(code::DIAGNOSTICS, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::config(format!("output: {e}"))
    }
}
