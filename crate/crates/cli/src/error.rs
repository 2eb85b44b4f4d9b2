use std::fmt;
use std::path::Path;

use cpscausal::error::ErrorClass;

/// A failure mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flag combination or value: exit 2.
    Usage(String),
    /// Unreadable or malformed input: exit 3.
    Data { code: &'static str, message: String },
    /// The model cannot be built, fitted or queried: exit 4.
    Model { code: &'static str, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data { .. } => 3,
            CliError::Model { .. } => 4,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "UsageError",
            CliError::Data { code, .. } | CliError::Model { code, .. } => code,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "code": self.code(), "message": self.to_string() } }).to_string()
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Data { code: "Io", message: format!("{}: {e}", path.display()) }
    }

    pub fn json(path: &Path, e: serde_json::Error) -> Self {
        CliError::Data { code: "InvalidJson", message: format!("{}: {e}", path.display()) }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Data { message, .. } | CliError::Model { message, .. } => f.write_str(message),
        }
    }
}

impl<E: Into<cpscausal::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        let e: cpscausal::Error = e.into();
        let (code, message) = (e.code(), e.to_string());
        match e.class() {
            ErrorClass::Data => CliError::Data { code, message },
            ErrorClass::Model => CliError::Model { code, message },
        }
    }
}
