//! Run reports: deterministic JSON records of inputs, outputs and checks.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Report of one CLI invocation. Timings are included only on request so
/// that repeated runs with identical inputs and seed are byte-identical.
#[derive(Serialize)]
pub struct RunReport {
    pub command: String,
    pub tool_version: &'static str,
    pub seed: u64,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<u128>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
}

impl RunReport {
    pub fn new(command: &str, seed: u64) -> Self {
        RunReport {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION"),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            checks: Vec::new(),
            timings_ms: None,
            data: serde_json::Value::Null,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path)
            .with_context(|| format!("digesting {}", path.display()))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for b in digest {
            hex.push_str(&format!("{b:02x}"));
        }
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: hex });
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: String) {
        println!("[{}] {name}: {detail}", if pass { "ok" } else { "FAIL" });
        self.checks.push(Check { name: name.to_string(), pass, detail });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write(&self, path: Option<&PathBuf>) -> Result<()> {
        if let Some(path) = path {
            fs::write(path, serde_json::to_string_pretty(self)?)
                .with_context(|| format!("writing report {}", path.display()))?;
        }
        Ok(())
    }
}
