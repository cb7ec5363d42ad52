//! Command-line interface.
//!
//! Exit statuses: 0 on success, 2 on configuration or usage errors, 3 on
//! task errors, 4 when the runaway-event guard trips.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::{parse_config, parse_value};
use crate::models::ModelFamily;
use crate::sequencer::SimulationController;

#[derive(Parser)]
#[command(
    name = "swarmsim",
    version,
    about = "Discrete-event simulator for very large wireless sensor networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario configuration file
    Run {
        /// Path to the setup file
        config: PathBuf,
        /// Run seed; overrides any `seed` set in the configuration
        #[arg(long)]
        seed: Option<u64>,
        /// Write metric rows to this CSV file instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
        /// Extra environment entries applied before the first task
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
    },
    /// Parse a configuration file and report errors, without running it
    Validate { config: PathBuf },
    /// List the registered model implementations
    Models,
}

/// Runs the CLI against `args` (including the program name) and returns the
/// process exit status.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            params,
        } => run(config, seed, out, params),
        Command::Validate { config } => validate(config),
        Command::Models => {
            let controller = SimulationController::new(None);
            for family in ModelFamily::ALL {
                println!(
                    "{}: {}",
                    family,
                    controller.registry().identifiers(family).join(" ")
                );
            }
            0
        }
    }
}

fn run(config: PathBuf, seed: Option<u64>, out: Option<PathBuf>, params: Vec<String>) -> i32 {
    let text = match std::fs::read_to_string(&config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return 2;
        }
    };
    let program = match parse_config(&text) {
        Ok(program) => program,
        Err(e) => {
            eprintln!("error: {}: {e}", config.display());
            return 2;
        }
    };
    let mut controller = SimulationController::new(seed);
    if let Some(path) = &out {
        if let Err(e) = controller.set_csv_path(path) {
            eprintln!("error: cannot open {}: {e}", path.display());
            return 2;
        }
    }
    for entry in &params {
        let Some((key, value)) = entry.split_once('=') else {
            eprintln!("error: --param expects KEY=VALUE, got {entry:?}");
            return 2;
        };
        controller
            .env_mut()
            .insert(key.to_string(), parse_value(value));
    }
    match controller.run_program(&program) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}: {e}", config.display());
            e.exit_status()
        }
    }
}

fn validate(config: PathBuf) -> i32 {
    let text = match std::fs::read_to_string(&config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return 2;
        }
    };
    match parse_config(&text) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {}: {e}", config.display());
            2
        }
    }
}
