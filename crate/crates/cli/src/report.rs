use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct Tolerances {
    pub rank: f64,
    pub orthogonality: f64,
}

/// Machine-readable record of one invocation. Deterministic unless wall
/// time was requested.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    /// sha256 of each input file, keyed by flag name.
    pub inputs: BTreeMap<String, String>,
    pub tolerances: Tolerances,
    pub outcome: String,
    pub exit_code: u8,
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

pub fn digest_file(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Writes to `target`, or stdout when it is `-`.
pub fn emit(report: &RunReport, target: &str) -> ttcone::Result<()> {
    let text = ttcone::io::to_json(report)?;
    if target == "-" {
        print!("{text}");
    } else {
        std::fs::write(target, text)?;
    }
    Ok(())
}
