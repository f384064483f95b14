//! `dimmax`: evaluate, optimize and diagnose dimensions of Bernoulli measures
//! on continued-fraction digits.
//!
//! Exit codes: 0 success, 2 configuration error, 3 optimization did not
//! converge (artifacts still written), 4 numeric failure or evaluator
//! disagreement.

mod commands;
mod config;
mod error;
mod output;

use clap::{Parser, Subcommand};
use config::{CommandKind, Flags, RunConfig};
use error::CliError;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "dimmax",
    version,
    about = "Dimension of Bernoulli measures for the Gauss map"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy, Lyapunov exponent and dimension of given weights.
    Evaluate(Flags),
    /// Maximize the dimension over digits 1..=n.
    Optimize(Flags),
    /// Optimize over an increasing list of n.
    Sweep(Flags),
    /// Transfer-operator and pressure checks.
    Diagnose(Flags),
}

fn thread_count() -> Result<usize, CliError> {
    match std::env::var("DIMMAX_THREADS") {
        Ok(s) => {
            let k: usize = s.trim().parse().ok().filter(|&k| k > 0).ok_or_else(|| {
                CliError::Config(format!("DIMMAX_THREADS = {s:?} is not a positive integer"))
            })?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build_global()
                .map_err(|e| CliError::Config(e.to_string()))?;
            Ok(k)
        }
        Err(_) => Ok(rayon::current_num_threads()),
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let (kind, flags) = match cli.command {
        Command::Evaluate(f) => (CommandKind::Evaluate, f),
        Command::Optimize(f) => (CommandKind::Optimize, f),
        Command::Sweep(f) => (CommandKind::Sweep, f),
        Command::Diagnose(f) => (CommandKind::Diagnose, f),
    };
    let cfg = RunConfig::resolve(kind, flags)?;
    let threads = thread_count()?;
    let start = Instant::now();
    let outcome = commands::run(&cfg)?;
    let meta = output::metadata(start.elapsed().as_secs_f64(), threads, outcome.status);
    let written = output::write_all(&cfg, &outcome, &meta)?;
    println!("{}", outcome.summary);
    for path in written {
        println!("wrote {}", path.display());
    }
    match outcome.status {
        commands::Status::Ok => {}
        commands::Status::NotConverged => eprintln!("dimmax: optimization did not converge"),
        commands::Status::EvaluatorDisagreement => {
            eprintln!("dimmax: cylinder and operator evaluators disagree")
        }
    }
    Ok(outcome.status.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("dimmax: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
