use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod output;

#[derive(Parser)]
#[command(name = "lsbandit", version, about = "Bandit local search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (policy, horizon, seed) of a config and write traces and summaries.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for replications.
        #[arg(long)]
        workers: Option<usize>,
        /// Enumeration budget for OPT; overrides the config.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Check that the instance admits (beta, gamma)-improving moves.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, requires = "gamma", conflicts_with = "epsilon")]
        beta: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        /// Use the problem's own recipe at this epsilon.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = lsbandit::offline::DEFAULT_ENUMERATION_BUDGET)]
        budget: usize,
    },
    /// Run offline local search on exact expected costs.
    Offline {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        beta: f64,
        /// Starting solution id, e.g. `3-1-2`; defaults to the canonical start.
        #[arg(long)]
        start: Option<String>,
        /// Compare the result against gamma * OPT.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = lsbandit::harness::DEFAULT_OPT_BUDGET)]
        budget: usize,
    },
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Undecided(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Undecided(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, workers, budget } => commands::run(&config, out, workers, budget),
        Command::Verify { instance, beta, gamma, epsilon, budget } => {
            commands::verify(&instance, beta, gamma, epsilon, budget)
        }
        Command::Offline { instance, beta, start, gamma, budget } => {
            commands::offline(&instance, beta, start.as_deref(), gamma, budget)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Invalid(m) => eprintln!("error: {m}"),
                CliError::Undecided(m) => eprintln!("undecided: {m}"),
                CliError::Internal(m) => eprintln!("internal error: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
