use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Caveats that apply to every finite-horizon report.
pub const NOTES: [&str; 2] = [
    "nets are evaluated along a finite monotone cofinal sequence of indices",
    "limits as t or n tends to infinity are judged at the stated finite horizon",
];

/// Provenance embedded in every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn new(config_bytes: &[u8], seed: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: sha256_hex(config_bytes),
            seed,
            notes: NOTES.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// `#`-prefixed header lines for CSV outputs.
    pub fn csv_header(&self) -> String {
        format!("# {} {} config_sha256={} seed={}\n", self.tool, self.version, self.config_sha256, self.seed)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
