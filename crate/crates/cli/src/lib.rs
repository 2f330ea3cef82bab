//! Library side of the `fbsec` binary: scenario files, study runners and
//! CSV/manifest output.

pub mod bundled;
pub mod config;
pub mod output;
pub mod studies;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{} validation error(s): {}", .0.len(), .0.join("; "))]
    Validation(Vec<String>),

    #[error("{0}")]
    Infeasible(String),

    #[error("{0}")]
    Insufficient(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Core(fbsec_core::Error),
}

impl From<fbsec_core::Error> for CliError {
    fn from(e: fbsec_core::Error) -> Self {
        match e {
            fbsec_core::Error::InsufficientConditioning { .. } => Self::Insufficient(e.to_string()),
            fbsec_core::Error::Invalid(msg) => Self::Config(msg),
            other => Self::Core(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) => 1,
            Self::Config(_) | Self::Validation(_) | Self::Core(_) => 2,
            Self::Infeasible(_) => 3,
            Self::Insufficient(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Validation(_) => "validation",
            Self::Infeasible(_) => "infeasible",
            Self::Insufficient(_) => "insufficient-samples",
            Self::Io(_) => "io",
            Self::Core(_) => "domain",
        }
    }

    /// Single-line JSON diagnostic for stderr.
    pub fn to_json_line(&self) -> String {
        let mut v = serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let Self::Validation(issues) = self {
            v["issues"] = serde_json::json!(issues);
        }
        v.to_string()
    }
}
