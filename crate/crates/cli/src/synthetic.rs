use std::fs;
use std::path::{Path, PathBuf};

use prefdiag::ingest::{serialize_dataset, Format};
use prefdiag::seed::derive_seed;
use prefdiag::synth::{generate, SynthParams};
use serde_json::json;

use crate::error::CliError;
use crate::output::{pretty_json, write_atomic};

pub const TRUTH_FILE: &str = "truth.json";

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticFiles {
    pub dataset: PathBuf,
    pub truth: PathBuf,
}

/// Generates a planted-cluster dataset into `out` as `dataset.<ext>` plus
/// `truth.json`. `params.seed` is the master seed; the generator itself is
/// seeded with the derived `synthetic` sub-seed.
pub fn gen_synthetic(params: &SynthParams, format: Format, out: &Path) -> Result<SyntheticFiles, CliError> {
    let master = params.seed;
    let derived = SynthParams {
        seed: derive_seed(master, "synthetic", 0),
        ..params.clone()
    };
    let (dataset, truth) = generate(&derived).map_err(|e| CliError::Config(e.to_string()))?;
    fs::create_dir_all(out).map_err(|e| CliError::Config(format!("output directory {}: {e}", out.display())))?;

    let data = serialize_dataset(&dataset, format).map_err(CliError::internal)?;
    let dataset_path = out.join(format!("dataset.{}", format.extension()));
    write_atomic(&dataset_path, data.as_bytes()).map_err(CliError::internal)?;

    let mut dump = truth.to_json(&dataset);
    dump["params"] = json!({
        "num_items": params.num_items,
        "num_subjects": params.num_subjects,
        "num_planted_clusters": params.num_planted_clusters,
        "primary_select_prob": params.primary_select_prob,
        "switch_prob": params.switch_prob,
        "seed": master,
        "generator_seed": derived.seed,
    });
    let truth_path = out.join(TRUTH_FILE);
    let text = pretty_json(&dump).map_err(CliError::internal)?;
    write_atomic(&truth_path, text.as_bytes()).map_err(CliError::internal)?;
    Ok(SyntheticFiles {
        dataset: dataset_path,
        truth: truth_path,
    })
}
