use std::path::Path;
use thiserror::Error;
use wbc_polar::channel::ChannelError;
use wbc_polar::codec::CodecError;
use wbc_polar::eval::EvalError;
use wbc_polar::sets::SetError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SUITE: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("suite failure: {}", .0.join("; "))]
    SuiteFailed(Vec<String>),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn format(path: &Path, message: impl ToString) -> Self {
        CliError::Format {
            path: path.display().to_string(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Channel(_) => EXIT_CONFIG,
            CliError::Io { .. } | CliError::Format { .. } => EXIT_OTHER,
            CliError::Set(e) => set_code(e),
            CliError::Codec(e) => codec_code(e),
            CliError::Eval(e) => match e {
                EvalError::BudgetExceeded { .. } => EXIT_BUDGET,
                EvalError::InvalidArgument(_) | EvalError::Channel(_) => EXIT_CONFIG,
                EvalError::Set(e) => set_code(e),
                EvalError::Codec(e) => codec_code(e),
            },
            CliError::SuiteFailed(_) => EXIT_SUITE,
        }
    }
}

fn set_code(e: &SetError) -> i32 {
    match e {
        SetError::InfeasiblePlan(_) => EXIT_OTHER,
        _ => EXIT_CONFIG,
    }
}

fn codec_code(e: &CodecError) -> i32 {
    match e {
        CodecError::Overwrite(..) => EXIT_OTHER,
        _ => EXIT_CONFIG,
    }
}
