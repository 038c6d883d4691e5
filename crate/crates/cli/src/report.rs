use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Verification {
    pub ok: bool,
    pub max_discrepancy: f64,
    pub tolerance: f64,
}

/// Output of every subcommand except `gen`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub parameters: Value,
    pub inputs: Vec<InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub certificate: Value,
    /// Whether the certificate meets its stated bound.
    pub met: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

/// Reads an input file and records its digest.
pub struct Inputs {
    pub digests: Vec<InputDigest>,
}

impl Inputs {
    pub fn new() -> Self {
        Inputs { digests: Vec::new() }
    }

    pub fn read(&mut self, path: &Path) -> anyhow::Result<Vec<u8>> {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.digests.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(bytes)
    }
}

/// Wall-clock phase timer.
pub struct Timings {
    phases: BTreeMap<String, f64>,
}

impl Timings {
    pub fn new() -> Self {
        Timings { phases: BTreeMap::new() }
    }

    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.phases
            .insert(phase.to_string(), start.elapsed().as_secs_f64() * 1e3);
        out
    }

    pub fn into_map(self) -> BTreeMap<String, f64> {
        self.phases
    }
}
