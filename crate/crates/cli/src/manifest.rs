use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde::Serialize;

/// What ran, with which parameters, reading and writing which files.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub tool_version: &'static str,
    pub started: String,
    pub finished: Option<String>,
    pub error: Option<String>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(command: &str, parameters: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters,
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION"),
            started: now(),
            finished: None,
            error: None,
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn finish(&mut self, error: Option<&str>) -> String {
        self.finished = Some(now());
        self.error = error.map(str::to_string);
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
