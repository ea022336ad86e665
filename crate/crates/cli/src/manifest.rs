use std::path::Path;
use std::time::Duration;

use anyhow::Context;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub causal_core: String,
    pub causal_cli: String,
}

/// Record of one invocation: what went in, what came out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub arguments: Vec<String>,
    pub inputs: Vec<InputHash>,
    pub seed: Option<u64>,
    pub versions: Versions,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub exit_code: u8,
    pub result: serde_json::Value,
}

impl RunManifest {
    pub fn new(
        subcommand: &str,
        inputs: Vec<InputHash>,
        seed: Option<u64>,
        threads: usize,
        wall: Duration,
        exit_code: u8,
        result: serde_json::Value,
    ) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            arguments: std::env::args().skip(1).collect(),
            inputs,
            seed,
            versions: Versions {
                causal_core: causal_core::VERSION.to_string(),
                causal_cli: env!("CARGO_PKG_VERSION").to_string(),
            },
            threads,
            wall_time_seconds: wall.as_secs_f64(),
            exit_code,
            result,
        }
    }

    /// Writes pretty JSON to `path`, or one compact line to stderr.
    pub fn emit(&self, path: Option<&Path>) -> anyhow::Result<()> {
        match path {
            Some(p) => {
                let text = serde_json::to_string_pretty(self)?;
                std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))
            }
            None => {
                eprintln!("manifest {}", serde_json::to_string(self)?);
                Ok(())
            }
        }
    }
}
