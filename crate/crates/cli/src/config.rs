use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::ValueEnum;
use prefdiag::clustering::{DEFAULT_MAX_ITERATIONS, DEFAULT_RESTARTS};
use prefdiag::ingest::Format;
use prefdiag::layout::LayoutParams;
use prefdiag::profile::SecondaryMode;
use prefdiag::render::StyleOptions;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Which diagrams to build per granularity: part 1 shows the clusters and
/// primary links only, part 2 adds the switch objects.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Parts {
    Part1,
    Part2,
    #[default]
    Both,
}

impl Parts {
    pub fn part1(self) -> bool {
        matches!(self, Parts::Part1 | Parts::Both)
    }

    pub fn part2(self) -> bool {
        matches!(self, Parts::Part2 | Parts::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Svg,
    Dot,
    Json,
}

impl Emit {
    pub fn extension(self) -> &'static str {
        match self {
            Emit::Svg => "svg",
            Emit::Dot => "dot",
            Emit::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: PathBuf,
    /// Taken from the input's extension when absent.
    pub format: Option<Format>,
    pub granularities: Vec<usize>,
    #[serde(default)]
    pub mode: SecondaryMode,
    pub seed: u64,
    pub restarts: usize,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    pub out: PathBuf,
    pub emit: Vec<Emit>,
    #[serde(default)]
    pub parts: Parts,
    #[serde(default)]
    pub images: Option<PathBuf>,
    #[serde(default)]
    pub hide_isolated: bool,
    /// Layout settings; the seed inside is replaced per diagram.
    #[serde(default)]
    pub layout: LayoutParams,
    #[serde(default)]
    pub style: StyleOptions,
}

fn default_max_iterations() -> usize {
    DEFAULT_MAX_ITERATIONS
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, out: impl Into<PathBuf>, granularities: Vec<usize>) -> Self {
        Self {
            input: input.into(),
            format: None,
            granularities,
            mode: SecondaryMode::default(),
            seed: 0,
            restarts: DEFAULT_RESTARTS,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            out: out.into(),
            emit: vec![Emit::Svg, Emit::Json],
            parts: Parts::Both,
            images: None,
            hide_isolated: false,
            layout: LayoutParams::default(),
            style: StyleOptions::default(),
        }
    }

    pub fn input_format(&self) -> Result<Format, CliError> {
        self.format
            .or_else(|| Format::from_extension(&self.input))
            .ok_or_else(|| {
                CliError::Config(format!(
                    "cannot tell the format of {} from its extension; pass --format-in",
                    self.input.display()
                ))
            })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.granularities.is_empty() {
            return bad("at least one granularity is required".into());
        }
        if let Some(&k) = self.granularities.iter().find(|&&k| k == 0) {
            return bad(format!("granularity must be at least 1, got {k}"));
        }
        let distinct: BTreeSet<usize> = self.granularities.iter().copied().collect();
        if distinct.len() != self.granularities.len() {
            return bad("granularities must be distinct".into());
        }
        if self.restarts == 0 || self.max_iterations == 0 {
            return bad("restarts and max_iterations must be at least 1".into());
        }
        if self.emit.is_empty() {
            return bad("at least one output format is required".into());
        }
        self.layout.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.style.node_radius > 0.0 && self.style.node_radius.is_finite()) {
            return bad("node radius must be positive".into());
        }
        self.input_format()?;
        Ok(())
    }
}
