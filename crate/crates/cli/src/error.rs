//! Command-line error type with the exit-code split the tool promises:
//! 1 for validation problems (bad flags, bad file contents, model
//! errors), 2 for I/O failures.

use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub enum AppError {
    /// Bad input: flags, configuration contents, model preconditions.
    Validation(String),
    /// Failed reads or writes.
    Io(String),
}

impl AppError {
    pub fn validation(message: impl Into<String>) -> Self {
        AppError::Validation(message.into())
    }

    pub fn read(path: &Path, err: std::io::Error) -> Self {
        AppError::Io(format!("cannot read {}: {err}", path.display()))
    }

    pub fn write(path: &Path, err: std::io::Error) -> Self {
        AppError::Io(format!("cannot write {}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Validation(_) => 1,
            AppError::Io(_) => 2,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Validation(m) | AppError::Io(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for AppError {}

impl From<traincast_core::predict::PredictError> for AppError {
    fn from(e: traincast_core::predict::PredictError) -> Self {
        AppError::Validation(e.to_string())
    }
}

impl From<traincast_core::hardware::HardwareError> for AppError {
    fn from(e: traincast_core::hardware::HardwareError) -> Self {
        AppError::Validation(e.to_string())
    }
}

impl From<traincast_core::arch::ArchError> for AppError {
    fn from(e: traincast_core::arch::ArchError) -> Self {
        AppError::Validation(e.to_string())
    }
}

impl From<traincast_core::evaluate::EvalError> for AppError {
    fn from(e: traincast_core::evaluate::EvalError) -> Self {
        AppError::Validation(e.to_string())
    }
}
