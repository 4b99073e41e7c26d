use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn hash_file(path: &Path) -> Result<String, PipelineError> {
    let mut hasher = Sha256::new();
    let mut file = std::fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf).map_err(|e| PipelineError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ran,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub status: StageStatus,
    pub input_hashes: BTreeMap<String, String>,
    pub config_hash: String,
    /// Output paths relative to the run directory.
    pub outputs: BTreeMap<String, String>,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub stages: BTreeMap<String, StageRecord>,
}

impl Manifest {
    pub fn load(out_dir: &Path) -> Result<Manifest, PipelineError> {
        let path = out_dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(Manifest::default());
        }
        let text = std::fs::read_to_string(&path).map_err(|e| PipelineError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Manifest(e.to_string()))
    }

    pub fn save(&self, out_dir: &Path) -> Result<(), PipelineError> {
        let path = out_dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self).map_err(|e| PipelineError::Manifest(e.to_string()))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| PipelineError::io(&path, e))
    }

    /// Every output of every stage, keyed by relative path.
    pub fn artifact_hashes(&self) -> BTreeMap<String, String> {
        self.stages
            .values()
            .flat_map(|s| s.outputs.iter().map(|(k, v)| (k.clone(), v.clone())))
            .collect()
    }

    /// Re-hashes every listed output; returns a description of each mismatch.
    pub fn verify(&self, out_dir: &Path) -> Vec<String> {
        let mut problems = Vec::new();
        for (rel, want) in self.artifact_hashes() {
            let path = out_dir.join(&rel);
            match hash_file(&path) {
                Ok(got) if got == want => {}
                Ok(got) => problems.push(format!("{rel}: hash {got} does not match manifest {want}")),
                Err(_) => problems.push(format!("{rel}: missing")),
            }
        }
        problems
    }
}
