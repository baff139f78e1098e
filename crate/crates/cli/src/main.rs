use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use prefdiag::clustering::DEFAULT_RESTARTS;
use prefdiag::ingest::Format;
use prefdiag::profile::SecondaryMode;
use prefdiag::synth::SynthParams;
use prefdiag_cli::error::{CliError, EXIT_CONFIG, EXIT_INTERNAL};
use prefdiag_cli::{gen_synthetic, replay, run, Emit, Parts, RunConfig};

#[derive(Parser)]
#[command(name = "prefdiag", version, about = "Build preference diagrams from item-selection questionnaires")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster, profile, lay out and render diagrams for each granularity.
    Run(RunArgs),
    /// Write a synthetic dataset with planted clusters and its ground truth.
    GenSynthetic(SynthArgs),
    /// Re-run a recorded manifest and check that every artifact is identical.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_parser = parse_format)]
    format_in: Option<Format>,
    /// Comma-separated cluster counts, e.g. 3,5,7,8.
    #[arg(long, value_delimiter = ',', required = true)]
    clusters: Vec<usize>,
    #[arg(long, default_value = "weakest", value_parser = parse_mode)]
    mode: SecondaryMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Output formats.
    #[arg(long, visible_alias = "format", value_enum, value_delimiter = ',', default_value = "svg,json")]
    emit: Vec<Emit>,
    #[arg(long, value_enum, default_value = "both")]
    parts: Parts,
    /// JSON object mapping item labels to image paths.
    #[arg(long)]
    images: Option<PathBuf>,
    /// Leave items without any link out of the diagrams.
    #[arg(long)]
    hide_isolated: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    items: usize,
    #[arg(long, default_value_t = 32)]
    subjects: usize,
    /// Number of planted clusters.
    #[arg(long, default_value_t = 4)]
    clusters: usize,
    /// Chance that a subject's switch fires.
    #[arg(long, default_value_t = 0.15)]
    switch_prob: f64,
    /// Per-pick chance of staying in the home cluster once the switch fired.
    #[arg(long, default_value_t = 0.8)]
    primary_prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: Format,
    #[arg(long, default_value = "synthetic")]
    out: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Write into this directory instead of the recorded one.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: prefdiag::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<SecondaryMode, String> {
    s.parse().map_err(|e: prefdiag::Error| e.to_string())
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("prefdiag: {e}");
    e.to_exit()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run(a) => {
            let config = RunConfig {
                format: a.format_in,
                mode: a.mode,
                seed: a.seed,
                restarts: a.restarts,
                emit: a.emit,
                parts: a.parts,
                images: a.images,
                hide_isolated: a.hide_isolated,
                ..RunConfig::new(a.input, a.out, a.clusters)
            };
            match run(&config) {
                Ok(outcome) => {
                    for (k, f) in outcome.failures() {
                        eprintln!("prefdiag: |c|={k} {}: {}", f.scope, f.message);
                    }
                    println!("{}", outcome.manifest_path.display());
                    ExitCode::from(outcome.exit_code)
                }
                Err(e) => fail(e),
            }
        }
        Command::GenSynthetic(a) => {
            let params = SynthParams {
                num_items: a.items,
                num_subjects: a.subjects,
                num_planted_clusters: a.clusters,
                primary_select_prob: a.primary_prob,
                switch_prob: a.switch_prob,
                seed: a.seed,
            };
            match gen_synthetic(&params, a.format, &a.out) {
                Ok(files) => {
                    println!("{}", files.dataset.display());
                    println!("{}", files.truth.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Replay(a) => match replay(&a.manifest, a.out) {
            Ok(report) if report.mismatches.is_empty() => {
                println!("{}", report.outcome.manifest_path.display());
                ExitCode::from(report.outcome.exit_code)
            }
            Ok(report) => {
                for f in &report.mismatches {
                    eprintln!("prefdiag: {f} differs from the recorded run");
                }
                ExitCode::from(EXIT_INTERNAL)
            }
            Err(e) => fail(e),
        },
    }
}
