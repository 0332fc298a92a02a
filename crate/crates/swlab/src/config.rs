//! Experiment configuration files and field-by-field parameter checks.
//!
//! A config is TOML (or JSON, by extension or a leading brace):
//!
//! ```toml
//! experiment = "neck-sweep"
//! seed = 7
//! output = "runs/transversal"
//!
//! [parameters]
//! fixture = "transversal"
//! lengths = [10, 20, 40, 80, 160]
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult, FieldIssue};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub parameters: Map<String, Value>,
}

impl ExperimentConfig {
    pub fn parse(text: &str, json: bool) -> CliResult<Self> {
        if json {
            serde_json::from_str(text).map_err(|e| CliError::config(format!("JSON config: {e}")))
        } else {
            toml::from_str(text).map_err(|e| CliError::config(format!("TOML config: {e}")))
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
            || text.trim_start().starts_with('{');
        Self::parse(&text, json)
    }
}

/// Reads typed fields out of a parameter map, collecting every problem
/// instead of stopping at the first.
pub struct Fields {
    map: Map<String, Value>,
    seen: BTreeSet<String>,
    issues: Vec<FieldIssue>,
}

impl Fields {
    pub fn new(map: Map<String, Value>) -> Self {
        Fields { map, seen: BTreeSet::new(), issues: Vec::new() }
    }

    fn get<T: DeserializeOwned>(&mut self, key: &str) -> Option<Option<T>> {
        self.seen.insert(key.to_string());
        let v = self.map.get(key)?.clone();
        match serde_json::from_value(v) {
            Ok(x) => Some(Some(x)),
            Err(e) => {
                self.issue(key, format!("wrong type: {e}"));
                Some(None)
            }
        }
    }

    /// A required field; `None` after recording the problem.
    pub fn req<T: DeserializeOwned>(&mut self, key: &str) -> Option<T> {
        match self.get(key) {
            None => {
                self.issue(key, "missing required field".into());
                None
            }
            Some(v) => v,
        }
    }

    /// An optional field with its default; a malformed value is recorded
    /// and replaced by the default so checking can continue.
    pub fn opt<T: DeserializeOwned>(&mut self, key: &str, default: T) -> T {
        match self.get(key) {
            Some(Some(v)) => v,
            _ => default,
        }
    }

    /// Whether the map has `key`, without consuming it.
    pub fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn check(&mut self, key: &str, ok: bool, problem: &str) {
        if !ok {
            self.issue(key, problem.into());
        }
    }

    pub fn issue(&mut self, key: &str, problem: String) {
        self.issues.push(FieldIssue { field: key.to_string(), problem });
    }

    /// Fails with every recorded problem plus one per unknown key.
    pub fn finish(mut self, experiment: &str) -> CliResult<()> {
        let unknown: Vec<String> = self.map.keys().filter(|k| !self.seen.contains(*k)).cloned().collect();
        for k in unknown {
            self.issue(&k, "unknown field".into());
        }
        if self.issues.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config {
                message: format!("{} problem(s) in the {experiment} parameters", self.issues.len()),
                issues: self.issues,
            })
        }
    }
}
