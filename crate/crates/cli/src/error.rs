use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// Malformed file; `field` is the JSON path of the offending value.
    #[error("{path}: {field}: {message}")]
    Parse { path: PathBuf, field: String, message: String },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] neutral_assign::Error),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

impl CliError {
    /// 1 for input problems, 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            CliError::VerificationFailed(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Input(_) => "input",
            CliError::Core(e) if e.is_numerical() => "numerical",
            CliError::Core(_) => "domain",
            CliError::VerificationFailed(_) => "verification_failed",
        }
    }

    pub fn to_json(&self) -> String {
        let field = match self {
            CliError::Parse { field, .. } => Some(field.as_str()),
            _ => None,
        };
        let report = ErrorReport {
            error: ErrorBody { kind: self.kind(), message: self.to_string(), exit_code: self.exit_code(), field },
        };
        serde_json::to_string(&report).expect("error report serializes")
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
