use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Wall-clock time of one phase of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseTiming {
    pub name: String,
    pub seconds: f64,
}

#[derive(Default)]
pub struct PhaseClock {
    phases: Vec<PhaseTiming>,
}

impl PhaseClock {
    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f();
        self.phases.push(PhaseTiming {
            name: name.into(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn into_phases(self) -> Vec<PhaseTiming> {
        self.phases
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

/// Everything needed to reproduce and audit a run. Timings live here so the
/// other outputs stay byte-identical across runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub config: serde_json::Value,
    /// SHA-256 over the config bytes followed by every referenced input file.
    pub input_hash: String,
    pub threads: usize,
    pub seeds: Option<usize>,
    pub phases: Vec<PhaseTiming>,
    pub outputs: Vec<OutputDigest>,
    pub failures: Vec<String>,
}

pub fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    hex::encode(h.finalize())
}

pub fn digest_outputs(root: &Path, files: &[std::path::PathBuf]) -> Result<Vec<OutputDigest>> {
    files
        .iter()
        .map(|rel| {
            let path = root.join(rel);
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            Ok(OutputDigest {
                file: rel.to_string_lossy().replace('\\', "/"),
                sha256: sha256_hex(&[&bytes]),
            })
        })
        .collect()
}
