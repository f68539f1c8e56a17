use std::path::Path;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{origin}:{line}: {message}")]
    ConfigParse { origin: String, line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0} not found in the run directory; run `tailcast {1}` first")]
    MissingArtifact(String, &'static str),
    #[error(transparent)]
    Subcommand(#[from] tailcast_core::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::ConfigParse { .. } => "ConfigParseError",
            CliError::Usage(_) => "UsageError",
            CliError::Io { .. } => "IoError",
            CliError::MissingArtifact(..) | CliError::Subcommand(_) => "SubcommandError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigParse { .. } | CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    /// One-line JSON for the error stream.
    pub fn to_json(&self) -> String {
        let mut v = json!({ "error": self.kind(), "message": self.to_string() });
        if let CliError::Subcommand(e) = self {
            v["cause"] = json!(e.kind());
        }
        v.to_string()
    }
}
