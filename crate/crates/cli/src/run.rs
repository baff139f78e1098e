use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use prefdiag::clustering::{k_medoids, Clustering, ClusteringParams};
use prefdiag::diagram::{build_cluster_diagram, build_diagram, diagram_stats, DiagramStats, PreferenceDiagram};
use prefdiag::ingest::parse_dataset;
use prefdiag::layout::{spring_layout, LayoutResult};
use prefdiag::model::{Dataset, Warning};
use prefdiag::profile::{build_profiles, primary_attachments};
use prefdiag::render::{render_dot, render_svg};
use prefdiag::seed::derive_seed;
use prefdiag::similarity::{similarity_matrix, SimilarityMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{Emit, RunConfig};
use crate::error::{CliError, EXIT_CONFIG, EXIT_INTERNAL};
use crate::output::{pretty_json, sha256_hex, write_atomic};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Partial,
    Failed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    InvalidConfig,
    Internal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    /// `clustering`, `part1` or `part2`.
    pub scope: String,
    pub kind: FailureKind,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub clustering: u64,
    pub layout_part1: u64,
    pub layout_part2: u64,
}

impl Seeds {
    pub fn derive(master: u64, k: usize) -> Self {
        let k = k as u64;
        Self {
            clustering: derive_seed(master, "clustering", k),
            layout_part1: derive_seed(master, "layout-part1", k),
            layout_part2: derive_seed(master, "layout-part2", k),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringSummary {
    pub objective: f64,
    pub converged: bool,
    pub sizes: Vec<usize>,
    pub medoids: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutSummary {
    pub converged: bool,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartRecord {
    pub files: Vec<String>,
    pub stats: Value,
    pub layout: LayoutSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GranularityRecord {
    pub granularity: usize,
    pub status: Status,
    pub seeds: Seeds,
    pub clustering: Option<ClusteringSummary>,
    pub parts: BTreeMap<String, PartRecord>,
    pub files: Vec<String>,
    pub errors: Vec<Failure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: PathBuf,
    pub format: prefdiag::ingest::Format,
    pub sha256: String,
    pub items: usize,
    pub subjects: usize,
    pub warnings: Value,
}

/// Everything needed to reproduce a run: the input's hash, the full
/// configuration, derived seeds, and a hash of every artifact written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub input: InputRecord,
    pub config: RunConfig,
    pub granularities: Vec<GranularityRecord>,
    /// Artifact path relative to the output directory -> SHA-256.
    pub files: BTreeMap<String, String>,
    pub exit_code: u8,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    /// 0, or the most severe per-granularity failure code.
    pub exit_code: u8,
}

impl RunOutcome {
    pub fn failures(&self) -> impl Iterator<Item = (usize, &Failure)> {
        self.manifest
            .granularities
            .iter()
            .flat_map(|g| g.errors.iter().map(move |e| (g.granularity, e)))
    }
}

struct Context<'a> {
    config: &'a RunConfig,
    dataset: &'a Dataset,
    sim: &'a SimilarityMatrix,
    images: &'a HashMap<String, String>,
}

fn read_images(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Runs the whole pipeline for every requested granularity and writes the
/// bundle `out/<k>/part{1,2}.<fmt>` plus `out/manifest.json`.
///
/// Errors that stop the run before any granularity starts (unreadable
/// input, invalid configuration) are returned as `Err`. Failures inside one
/// granularity are recorded in the manifest and reflected in the exit code,
/// and the other granularities are still produced.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    config.validate()?;
    let format = config.input_format()?;
    let bytes = fs::read(&config.input).map_err(|e| CliError::Input(format!("{}: {e}", config.input.display())))?;
    let dataset = parse_dataset(bytes.as_slice(), format).map_err(|e| CliError::Input(format!("{}: {e}", config.input.display())))?;
    let images = match &config.images {
        Some(p) => read_images(p)?,
        None => HashMap::new(),
    };
    fs::create_dir_all(&config.out)
        .map_err(|e| CliError::Config(format!("output directory {}: {e}", config.out.display())))?;

    let sim = similarity_matrix(&dataset);
    let ctx = Context {
        config,
        dataset: &dataset,
        sim: &sim,
        images: &images,
    };

    let mut files = BTreeMap::new();
    let tsv = sim.to_labeled_tsv(&dataset);
    write_artifact(&config.out, "similarity.tsv", tsv.as_bytes(), &mut files).map_err(CliError::internal)?;

    let results: Vec<(GranularityRecord, BTreeMap<String, String>)> = config
        .granularities
        .par_iter()
        .map(|&k| run_granularity(&ctx, k))
        .collect();
    let mut records = Vec::with_capacity(results.len());
    for (record, written) in results {
        files.extend(written);
        records.push(record);
    }

    let exit_code = records
        .iter()
        .flat_map(|r| &r.errors)
        .map(|f| match f.kind {
            FailureKind::InvalidConfig => EXIT_CONFIG,
            FailureKind::Internal => EXIT_INTERNAL,
        })
        .max()
        .unwrap_or(0);

    let warnings: Vec<Warning> = dataset.validate();
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        input: InputRecord {
            path: config.input.clone(),
            format,
            sha256: sha256_hex(&bytes),
            items: dataset.num_items(),
            subjects: dataset.num_subjects(),
            warnings: warnings_json(&dataset, &warnings),
        },
        config: config.clone(),
        granularities: records,
        files,
        exit_code,
    };
    let manifest_path = config.out.join(MANIFEST_FILE);
    let text = pretty_json(&manifest).map_err(CliError::internal)?;
    write_atomic(&manifest_path, text.as_bytes()).map_err(CliError::internal)?;
    Ok(RunOutcome {
        manifest,
        manifest_path,
        exit_code,
    })
}

fn warnings_json(dataset: &Dataset, warnings: &[Warning]) -> Value {
    Value::Array(
        warnings
            .iter()
            .map(|w| match w {
                Warning::EmptySelection(s) => json!({"kind": "empty_selection", "subject": dataset.subject_label(*s)}),
                Warning::NeverSelected(j) => json!({"kind": "never_selected", "item": dataset.item_label(*j)}),
            })
            .collect(),
    )
}

fn write_artifact(out: &Path, rel: &str, bytes: &[u8], files: &mut BTreeMap<String, String>) -> std::io::Result<()> {
    let path = out.join(rel);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    write_atomic(&path, bytes)?;
    files.insert(rel.to_owned(), sha256_hex(bytes));
    Ok(())
}

fn failure(scope: &str, e: &prefdiag::Error) -> Failure {
    use prefdiag::Error as E;
    let kind = match e {
        E::NoSecondaryCluster | E::InvalidArgument(_) => FailureKind::InvalidConfig,
        _ => FailureKind::Internal,
    };
    Failure {
        scope: scope.to_owned(),
        kind,
        message: e.to_string(),
    }
}

fn run_granularity(ctx: &Context, k: usize) -> (GranularityRecord, BTreeMap<String, String>) {
    let seeds = Seeds::derive(ctx.config.seed, k);
    let mut record = GranularityRecord {
        granularity: k,
        status: Status::Ok,
        seeds,
        clustering: None,
        parts: BTreeMap::new(),
        files: Vec::new(),
        errors: Vec::new(),
    };
    let mut written = BTreeMap::new();

    let params = ClusteringParams::new(k)
        .with_seed(record.seeds.clustering)
        .with_restarts(ctx.config.restarts)
        .with_max_iterations(ctx.config.max_iterations);
    let clustering = match k_medoids(ctx.sim, &params) {
        Ok(c) => c,
        Err(e) => {
            record.errors.push(failure("clustering", &e));
            record.status = Status::Failed;
            return (record, written);
        }
    };
    record.clustering = Some(ClusteringSummary {
        objective: clustering.objective(),
        converged: clustering.converged(),
        sizes: clustering.sizes(),
        medoids: clustering.medoids().iter().map(|&m| ctx.dataset.item_label(m).to_owned()).collect(),
    });

    let mut emit = |rel: String, bytes: &[u8], record: &mut GranularityRecord| -> Result<(), Failure> {
        write_artifact(&ctx.config.out, &rel, bytes, &mut written).map_err(|e| Failure {
            scope: rel.clone(),
            kind: FailureKind::Internal,
            message: e.to_string(),
        })?;
        record.files.push(rel);
        Ok(())
    };

    let clustering_json = pretty_json(&clustering.to_json(ctx.dataset)).expect("json value serializes");
    if let Err(f) = emit(format!("{k}/clustering.json"), clustering_json.as_bytes(), &mut record) {
        record.errors.push(f);
    }

    let profiles = if ctx.config.parts.part2() {
        match build_profiles(ctx.dataset, &clustering, ctx.config.mode) {
            Ok(set) => {
                let text = pretty_json(&set.to_json(ctx.dataset)).expect("json value serializes");
                if let Err(f) = emit(format!("{k}/profiles.json"), text.as_bytes(), &mut record) {
                    record.errors.push(f);
                }
                Some(set)
            }
            Err(e) => {
                record.errors.push(failure("part2", &e));
                None
            }
        }
    } else {
        None
    };

    let mut parts: Vec<(&str, bool, u64)> = Vec::new();
    if ctx.config.parts.part1() {
        parts.push(("part1", false, record.seeds.layout_part1));
    }
    if ctx.config.parts.part2() && profiles.is_some() {
        parts.push(("part2", true, record.seeds.layout_part2));
    }
    for (name, switches, seed) in parts {
        let diagram = if switches {
            let set = profiles.as_ref().expect("part2 only scheduled with profiles");
            build_diagram(ctx.dataset, &clustering, &set.profiles, ctx.sim, true)
        } else {
            primary_attachments(ctx.dataset, &clustering)
                .and_then(|a| build_cluster_diagram(ctx.dataset, &clustering, &a, ctx.sim))
        };
        match diagram.and_then(|d| render_part(ctx, &clustering, d, seed)) {
            Ok(rendered) => {
                let mut files = Vec::new();
                let mut failed = false;
                for (fmt, bytes) in rendered.outputs {
                    let rel = format!("{k}/{name}.{}", fmt.extension());
                    match emit(rel.clone(), &bytes, &mut record) {
                        Ok(()) => files.push(rel),
                        Err(f) => {
                            record.errors.push(f);
                            failed = true;
                        }
                    }
                }
                if !failed {
                    record.parts.insert(
                        name.to_owned(),
                        PartRecord {
                            files,
                            stats: serde_json::to_value(&rendered.stats).expect("stats serialize"),
                            layout: rendered.layout,
                        },
                    );
                }
            }
            Err(e) => record.errors.push(failure(name, &e)),
        }
    }

    record.status = if record.errors.is_empty() {
        Status::Ok
    } else if record.parts.is_empty() {
        Status::Failed
    } else {
        Status::Partial
    };
    (record, written)
}

struct Rendered {
    outputs: Vec<(Emit, Vec<u8>)>,
    stats: DiagramStats,
    layout: LayoutSummary,
}

fn render_part(ctx: &Context, clustering: &Clustering, mut diagram: PreferenceDiagram, seed: u64) -> prefdiag::Result<Rendered> {
    debug_assert_eq!(diagram.granularity, clustering.k());
    if ctx.config.hide_isolated {
        diagram = diagram.without_isolated_items();
    }
    diagram.attach_images(ctx.images);
    diagram.validate()?;
    let params = ctx.config.layout.clone().with_seed(seed);
    let layout = spring_layout(&diagram, &params);
    let mut emits = ctx.config.emit.clone();
    emits.sort();
    emits.dedup();
    let mut outputs = Vec::new();
    for fmt in emits {
        let bytes = match fmt {
            Emit::Svg => render_svg(&diagram, &layout, &ctx.config.style)?.into_bytes(),
            Emit::Dot => render_dot(&diagram).into_bytes(),
            Emit::Json => diagram_json(&diagram, &layout, seed)?.into_bytes(),
        };
        outputs.push((fmt, bytes));
    }
    Ok(Rendered {
        outputs,
        stats: diagram_stats(&diagram),
        layout: LayoutSummary {
            converged: layout.converged,
            residual: layout.residual,
            iterations: layout.iterations,
        },
    })
}

/// The diagram's JSON dump with the computed layout attached.
fn diagram_json(diagram: &PreferenceDiagram, layout: &LayoutResult, seed: u64) -> prefdiag::Result<String> {
    let mut value = serde_json::to_value(diagram)?;
    let mut placed = serde_json::to_value(layout)?;
    placed["seed"] = json!(seed);
    value["layout"] = placed;
    Ok(pretty_json(&value)?)
}
