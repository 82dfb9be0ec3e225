use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// JSON run report: input digest, options, seed, result sections and work
/// counters.
pub struct RunReport {
    input: Value,
    options: Map<String, Value>,
    seed: u64,
    sections: Map<String, Value>,
    counters: Map<String, Value>,
    error: Option<String>,
    exit_code: u8,
    wall_time_ms: f64,
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report data serializes")
}

impl RunReport {
    pub fn new(seed: u64) -> Self {
        Self {
            input: Value::Null,
            options: Map::new(),
            seed,
            sections: Map::new(),
            counters: Map::new(),
            error: None,
            exit_code: 0,
            wall_time_ms: 0.0,
        }
    }

    pub fn set_input(&mut self, path: &Path, text: &str) {
        let digest: String = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        self.input = serde_json::json!({ "path": path.display().to_string(), "sha256": digest, "bytes": text.len() });
    }

    pub fn option(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.options.insert(key.to_string(), to_value(value));
        self
    }

    pub fn section(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.sections.insert(key.to_string(), to_value(value));
        self
    }

    pub fn counter(&mut self, key: &str, value: u64) {
        self.counters.insert(key.to_string(), value.into());
    }

    pub fn error(&mut self, message: &str) {
        self.error = Some(message.to_string());
    }

    pub fn finish(&mut self, exit_code: u8, elapsed: Duration) {
        self.exit_code = exit_code;
        self.wall_time_ms = elapsed.as_secs_f64() * 1e3;
    }

    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({
            "input": self.input,
            "options": self.options,
            "seed": self.seed,
            "results": self.sections,
            "counters": self.counters,
            "error": self.error,
            "exit_code": self.exit_code,
            "wall_time_ms": self.wall_time_ms,
        });
        serde_json::to_string_pretty(&doc).expect("report data serializes")
    }
}
