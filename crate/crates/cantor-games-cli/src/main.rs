//! Command-line harness for the interval allocation games.
//!
//! Exit codes: 0 completed match or passing verification, 2 malformed
//! config or unreadable artifact, 3 rule violation, 4 falsification,
//! 5 failed verification.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

mod config;
mod report;
mod run;
mod strategy;
mod sweep;
mod verify;

#[derive(Parser)]
#[command(name = "cantor-games", version, about = "interval allocation game harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one match and write its transcript and report.
    Run {
        /// Config file (`key = value` lines).
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Move budget before the match is called undecided.
        #[arg(long, default_value_t = 200_000)]
        max_moves: usize,
    },
    /// Run a grid of matches or design checks into one CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value_t = 200_000)]
        max_moves: usize,
    },
    /// Re-check a transcript, design list or plane CSV.
    Verify {
        /// Path to the artifact.
        artifact: PathBuf,
    },
}

/// Progress lines on stderr, enabled by setting CANTOR_GAMES_LOG.
pub fn log_line(msg: &str) {
    if std::env::var_os("CANTOR_GAMES_LOG").is_some() {
        eprintln!("[cantor-games] {msg}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out, seed, max_moves } => {
            run::cmd_run(&config, &out, seed, max_moves)
        }
        Command::Sweep { config, out, jobs, max_moves } => {
            sweep::cmd_sweep(&config, &out, jobs, max_moves)
        }
        Command::Verify { artifact } => verify::cmd_verify(&artifact),
    };
    ExitCode::from(code)
}
