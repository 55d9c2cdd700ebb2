use std::fmt;

use serde_json::json;

#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or inputs.
    Config(String),
    Library(gibbsdiv::Error),
    /// Checks ran but some failed.
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Library(e) => match e {
                gibbsdiv::Error::Domain(_) | gibbsdiv::Error::Range(_) | gibbsdiv::Error::Parse(_) => 2,
                _ => 3,
            },
            CliError::Verification(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Library(e) => match e {
                gibbsdiv::Error::Domain(_) => "domain",
                gibbsdiv::Error::Range(_) => "range",
                gibbsdiv::Error::Parse(_) => "parse",
                gibbsdiv::Error::Numeric { .. } => "numeric",
                gibbsdiv::Error::Precision { .. } => "precision",
                gibbsdiv::Error::Io(_) => "io",
                gibbsdiv::Error::Json(_) => "json",
            },
            CliError::Verification(_) => "verification",
        }
    }

    /// One-line JSON for standard error.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        match self {
            CliError::Library(gibbsdiv::Error::Numeric {
                estimate,
                error_estimate,
                evaluations,
                ..
            }) => {
                v["estimate"] = json!(estimate);
                v["error_estimate"] = json!(error_estimate);
                v["evaluations"] = json!(evaluations);
            }
            CliError::Library(gibbsdiv::Error::Precision { digits, required }) => {
                v["digits"] = json!(digits);
                v["required"] = json!(required);
            }
            _ => {}
        }
        v
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Verification(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gibbsdiv::Error> for CliError {
    fn from(e: gibbsdiv::Error) -> Self {
        CliError::Library(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Library(gibbsdiv::Error::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Library(gibbsdiv::Error::Json(e))
    }
}
