mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Mode;
use config::ExperimentConfig;
use senile_walks::Error;

/// Simulate senile persistent and senile reinforced random walks and check
/// their moments, martingales and scaling limits.
#[derive(Parser)]
#[command(name = "senile", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moments of the step time T and the diffusion regime.
    Moments {
        #[command(flatten)]
        config: ExperimentConfig,
    },
    /// Simulate paths and write them as CSV or JSON lines.
    Simulate {
        #[arg(long, value_enum, default_value = "walk")]
        mode: Mode,
        #[command(flatten)]
        config: ExperimentConfig,
    },
    /// Run the acceptance suite; exits with 1 if any criterion fails.
    Verify {
        /// Halve the martingale correction coefficients.
        #[arg(long)]
        sabotage: bool,
        /// Run only these criteria, e.g. "3,7".
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[command(flatten)]
        config: ExperimentConfig,
    },
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Moments { config } => {
            commands::moments(&ExperimentConfig::resolve(&config)?)?;
        }
        Command::Simulate { mode, config } => {
            commands::simulate(mode, &ExperimentConfig::resolve(&config)?)?;
        }
        Command::Verify {
            sabotage,
            only,
            config,
        } => {
            if !commands::verify(&ExperimentConfig::resolve(&config)?, sabotage, &only)? {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() || matches!(e, Error::Io(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
