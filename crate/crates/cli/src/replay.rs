use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::output::sha256_hex;
use crate::run::{run, Manifest, RunOutcome};

#[derive(Debug)]
pub struct ReplayReport {
    pub outcome: RunOutcome,
    /// Artifacts whose hash differs from the recorded one, or that are
    /// missing from either run.
    pub mismatches: Vec<String>,
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Re-runs the configuration recorded in a manifest, optionally into another
/// output directory, and compares every artifact hash with the recording.
/// The input must hash to the recorded value.
pub fn replay(manifest_path: &Path, out: Option<PathBuf>) -> Result<ReplayReport, CliError> {
    let recorded = read_manifest(manifest_path)?;
    let input = fs::read(&recorded.config.input)
        .map_err(|e| CliError::Input(format!("{}: {e}", recorded.config.input.display())))?;
    let actual = sha256_hex(&input);
    if actual != recorded.input.sha256 {
        return Err(CliError::Input(format!(
            "{} has changed since the recorded run (sha256 {actual}, recorded {})",
            recorded.config.input.display(),
            recorded.input.sha256
        )));
    }
    let mut config = recorded.config.clone();
    if let Some(out) = out {
        config.out = out;
    }
    let outcome = run(&config)?;
    let mut mismatches = Vec::new();
    for (file, hash) in &recorded.files {
        if outcome.manifest.files.get(file) != Some(hash) {
            mismatches.push(file.clone());
        }
    }
    for file in outcome.manifest.files.keys() {
        if !recorded.files.contains_key(file) {
            mismatches.push(file.clone());
        }
    }
    Ok(ReplayReport { outcome, mismatches })
}
