//! Config-driven experiment runs.
//!
//! A run reads one JSON config, writes hull CSVs, traces and `metrics.json`
//! into its output directory, and finishes with `manifest.json` holding the
//! config echo, input hash, thread count, phase timings and output digests.
//! Metrics files contain no timings so reruns are byte-identical.

pub mod config;
pub mod emit;
pub mod manifest;
mod runner;

pub use config::ExperimentConfig;
pub use runner::{run_config, run_file, scp_monotone_share, RunOptions, RunReport};
