//! Experiment runner for the hypervolume scalarization studies.
//!
//! The `hvscal` binary exposes three subcommands:
//!
//! - `whitebox`: scalarized selection over a known grid frontier with
//!   hypervolume-regret curves;
//! - `bandit`: ExploreUCB on anti-correlated linear bandit instances with
//!   cumulative hypervolume curves;
//! - `hv-check`: exact against Monte-Carlo hypervolume on random point sets.
//!
//! Every run writes `curves.csv` and `manifest.json` (and `frontier.csv`
//! with `--snapshot`) into the output directory.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod method;
pub mod output;
pub mod seed;

pub use cli::run_cli;
pub use config::{Experiment, ExperimentConfig, Overrides};
pub use error::{CliError, Result};
pub use experiment::{execute, run, RunOutput, RunSummary};
pub use output::{read_curves, read_snapshot, CurveRecord, Layer, SnapshotRow};
pub use seed::seed_derivation;
