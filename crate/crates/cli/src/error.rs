use std::process::ExitCode;

use serde_json::json;

/// Failures that end a run before a verdict; each maps to an exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// A module rejected the requested parameters.
    #[error("{module}: {message}")]
    Module { module: &'static str, message: String },
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn module(module: &'static str, err: impl std::fmt::Display) -> Self {
        CliError::Module { module, message: err.to_string() }
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Module { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self {
            CliError::Usage(_) => "usage",
            CliError::Module { .. } => "module",
            CliError::Internal(_) => "internal",
        };
        let mut err = json!({ "kind": kind, "message": self.to_string() });
        if let CliError::Module { module, .. } = self {
            err["module"] = json!(module);
        }
        json!({ "error": err, "exit_code": self.code() })
    }

    pub fn report(&self) -> ExitCode {
        eprintln!("{}", self.to_json());
        ExitCode::from(self.code())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(format!("i/o: {e}"))
    }
}
