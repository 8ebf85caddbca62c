use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid frame configuration: {0}")]
    Config(String),

    #[error("invalid value for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("division domain error: {0}")]
    Domain(String),

    #[error("idle penalty undefined: baseline energy is zero")]
    UndefinedPenalty,

    #[error(
        "calibration infeasible: target {target} not reachable with ratio in [1, {max_ratio}]"
    )]
    CalibrationInfeasible { target: f64, max_ratio: f64 },

    #[error("transport mode `{0}` has the wrong rate kind for this operation")]
    WrongMode(String),

    #[error("scenario parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported output format `{0}`")]
    Format(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code for the CLI: 2 for input problems, 3 for calibration failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CalibrationInfeasible { .. } => 3,
            _ => 2,
        }
    }
}
