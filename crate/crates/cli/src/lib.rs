//! `diqrng` command-line front end.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;

use clap::{CommandFactory, Parser, Subcommand};
use thiserror::Error;

use diqrng_core::{AnalysisError, GameError, ProtocolError};

pub use commands::{execute, Outcome};
pub use config::Flags;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Parser, Debug)]
#[command(name = "diqrng", version, about = "Simulate nonlocal games and randomness certification protocols")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Exact and sampled score of a strategy for one game.
    PlayGame(Flags),
    /// Run protocol P or Q against honest or cheating devices.
    RunProtocol(Flags),
    /// Exhaustive classical maximum for a game, or with --protocol P the
    /// protocol run against every classical table pair.
    BruteforceClassical(Flags),
    /// State and score equivalence between game pairs.
    EquivalenceCheck(Flags),
    /// Sampled guessing experiments on protocol P.
    GuessingBounds(Flags),
    /// Entropy and randomness battery for a bit dump.
    Analyze(Flags),
}

impl Command {
    pub fn flags(&self) -> &Flags {
        match self {
            Command::PlayGame(f)
            | Command::RunProtocol(f)
            | Command::BruteforceClassical(f)
            | Command::EquivalenceCheck(f)
            | Command::GuessingBounds(f)
            | Command::Analyze(f) => f,
        }
    }
}

fn write_outcome(o: &Outcome) -> Result<(), CliError> {
    let io = |p: &std::path::Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    if let Some((path, text)) = &o.bits {
        report::write_file(path, text).map_err(|e| io(path, e))?;
    }
    match &o.out {
        Some(path) => report::write_file(path, &o.report).map_err(|e| io(path, e))?,
        None => std::io::stdout()
            .write_all(o.report.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}")))?,
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code:
/// 0 success or PASS, 2 ABORT or a failed check, 1 usage or runtime error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let env_seed = std::env::var(config::SEED_ENV).ok();
    match execute(&cli.command, env_seed).and_then(|o| write_outcome(&o).map(|_| o.exit_code)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("{}", Cli::command().render_usage());
            }
            1
        }
    }
}
