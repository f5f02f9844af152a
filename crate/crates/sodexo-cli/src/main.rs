//! `sodexo` — scenario runner for the botnet-defense models.
//!
//! Reads a JSON scenario config, executes the referenced model (ODE
//! integration, agent-based ensemble, allocation game, deployment
//! optimization, or ABM-vs-ODE comparison), and writes deterministic CSV and
//! JSON artifacts plus a run-report manifest into the output directory.
//!
//! Exit codes: 0 on success, 2 for config errors (parse failures, unknown
//! keys, validation violations), 3 for runtime errors (model preconditions,
//! I/O). Errors are emitted as one JSON object on stderr.

mod config;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

/// Run one scenario config and write its artifacts.
#[derive(Debug, Parser)]
#[command(name = "sodexo", version, about)]
pub struct Cli {
    /// Path to the JSON scenario config.
    #[arg(long)]
    pub config: PathBuf,

    /// Output directory. Falls back to the config's `out_dir`, then the
    /// `SODEXO_OUT` environment variable, then `./out`.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Override the seed from the config.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Suppress the run report on stdout.
    #[arg(long)]
    pub quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match scenarios::execute(&cli) {
        Ok(report) => {
            if !cli.quiet {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report)
                        .expect("run report serialization cannot fail")
                );
            }
            ExitCode::SUCCESS
        }
        Err(error) => {
            eprintln!("{}", error.to_json());
            ExitCode::from(error.exit_code())
        }
    }
}
