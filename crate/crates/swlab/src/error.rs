use serde::Serialize;
use serde_json::{json, Value};

/// One rejected configuration field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldIssue {
    pub field: String,
    pub problem: String,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration rejected: {message}")]
    Config { message: String, issues: Vec<FieldIssue> },

    /// A kernel refused its inputs.
    #[error("{module}: {source}")]
    Rejected { module: &'static str, source: swlab_core::Error },

    /// A kernel failed while computing.
    #[error("{module}: {source}")]
    Numerical { module: &'static str, source: swlab_core::Error },

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config { message: message.into(), issues: Vec::new() }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Wraps a kernel error: bad inputs exit like configuration errors,
    /// everything else as a numerical failure.
    pub fn from_core(module: &'static str, source: swlab_core::Error) -> Self {
        use swlab_core::Error as E;
        match source {
            E::InvalidInput(_) | E::Domain { .. } | E::GridMismatch(_) => CliError::Rejected { module, source },
            _ => CliError::Numerical { module, source },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Rejected { .. } => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } => 1,
        }
    }

    /// Machine-readable form written to stderr on failure.
    pub fn to_json(&self) -> Value {
        let kind = match self {
            CliError::Config { .. } => "config",
            CliError::Rejected { .. } => "rejected",
            CliError::Numerical { .. } => "numerical",
            CliError::Io { .. } => "io",
        };
        let mut v = json!({
            "error": kind,
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        match self {
            CliError::Config { issues, .. } => v["issues"] = json!(issues),
            CliError::Rejected { module, source } | CliError::Numerical { module, source } => {
                v["module"] = json!(module);
                v["diagnostic"] = json!(format!("{source:?}"));
            }
            CliError::Io { path, .. } => v["path"] = json!(path),
        }
        v
    }
}

/// Extension for attaching the module name to kernel results.
pub trait InModule<T> {
    fn in_module(self, module: &'static str) -> CliResult<T>;
}

impl<T> InModule<T> for swlab_core::Result<T> {
    fn in_module(self, module: &'static str) -> CliResult<T> {
        self.map_err(|e| CliError::from_core(module, e))
    }
}
