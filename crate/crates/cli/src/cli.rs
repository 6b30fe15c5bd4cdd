//! Command-line front end.

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::{Experiment, ExperimentConfig, Overrides};
use crate::experiment::run;

#[derive(Debug, Parser)]
#[command(name = "hvscal", version, about = "Scalarized multiobjective experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scalarized selection over a known grid frontier.
    Whitebox(Overrides),
    /// ExploreUCB on anti-correlated linear bandit instances.
    Bandit(Overrides),
    /// Exact against Monte-Carlo hypervolume on random point sets.
    HvCheck(Overrides),
}

/// Parses `args` (program name first), runs the experiment and returns the
/// process exit code: 0 on success, 1 for configuration errors, 2 when the
/// run itself fails.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let (experiment, flags) = match cli.command {
        Command::Whitebox(o) => (Experiment::Whitebox, o),
        Command::Bandit(o) => (Experiment::Bandit, o),
        Command::HvCheck(o) => (Experiment::HvCheck, o),
    };
    let result = ExperimentConfig::from_sources(experiment, &flags).and_then(|config| run(&config));
    match result {
        Ok(summary) => {
            for f in &summary.files {
                eprintln!("wrote {}", f.display());
            }
            eprintln!("{} rows", summary.rows);
            0
        }
        Err(e) => {
            eprintln!("hvscal: {e}");
            e.exit_code()
        }
    }
}
