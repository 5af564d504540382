//! Run manifests: the resolved inputs of one command and their hash.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::error::{AppError, AppResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config_path: String,
    pub config_hash: String,
    /// Resolved parameters, e.g. `epsilon`, `preset`, `dt`.
    pub parameters: BTreeMap<String, String>,
    pub tool_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl RunManifest {
    pub fn new(command: &str, config_path: &Path, config_text: &str) -> Self {
        Self {
            command: command.into(),
            config_path: config_path.display().to_string(),
            config_hash: sha256_hex(config_text.as_bytes()),
            parameters: BTreeMap::new(),
            tool_version: TOOL_VERSION.into(),
            started_unix: now(),
            finished_unix: 0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    /// Hash over command, config content, parameters and tool version.
    /// Paths and timestamps are excluded so reruns hash identically.
    pub fn hash(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command={}", self.command);
        let _ = writeln!(s, "config={}", self.config_hash);
        let _ = writeln!(s, "version={}", self.tool_version);
        for (k, v) in &self.parameters {
            let _ = writeln!(s, "{k}={v}");
        }
        sha256_hex(s.as_bytes())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "hash = \"{}\"", self.hash());
        let _ = writeln!(s, "command = \"{}\"", self.command);
        let _ = writeln!(s, "config_path = {:?}", self.config_path);
        let _ = writeln!(s, "config_hash = \"{}\"", self.config_hash);
        let _ = writeln!(s, "tool_version = \"{}\"", self.tool_version);
        let _ = writeln!(s, "started_unix = {}", self.started_unix);
        let _ = writeln!(s, "finished_unix = {}", self.finished_unix);
        let _ = writeln!(s, "\n[parameters]");
        for (k, v) in &self.parameters {
            let _ = writeln!(s, "{k} = {v:?}");
        }
        s
    }

    pub fn write(&mut self, path: &Path) -> AppResult<()> {
        self.finished_unix = now();
        std::fs::write(path, self.to_text()).map_err(|e| AppError::io(path, e))
    }
}
