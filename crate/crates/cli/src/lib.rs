//! Batch generation of preference diagram bundles: one dataset in, part-1
//! and part-2 diagrams at several granularities out, with a manifest that
//! reproduces the run.

pub mod config;
pub mod error;
pub mod output;
pub mod replay;
pub mod run;
pub mod synthetic;

pub use config::{Emit, Parts, RunConfig};
pub use error::CliError;
pub use replay::{replay, ReplayReport};
pub use run::{run, Manifest, RunOutcome};
pub use synthetic::gen_synthetic;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
