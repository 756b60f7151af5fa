//! Provenance stamping: every artifact records the tool version, the seed
//! and a hash of the configuration that produced it.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
}

impl Provenance {
    /// `config_parts` are the raw bytes of every input that shaped the run
    /// (config files, trajectory identifiers); order matters.
    pub fn new(seed: u64, config_parts: &[&[u8]]) -> Self {
        let mut hasher = Sha256::new();
        for part in config_parts {
            hasher.update((part.len() as u64).to_le_bytes());
            hasher.update(part);
        }
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config_sha256: hex(&hasher.finalize()),
        }
    }

    /// Comment line embedded at the top of CSV artifacts.
    pub fn csv_comment(&self) -> String {
        format!(
            "# latbench {} seed={} config_sha256={}\n",
            self.version, self.seed, self.config_sha256
        )
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
