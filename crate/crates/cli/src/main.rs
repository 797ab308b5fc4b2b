//! `lbcast`: check SC/NC, simulate the consensus algorithm, sweep fault
//! scenarios, and replay the impossibility construction.

mod commands;
mod options;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use options::{CheckArgs, GenArgs, NecessityArgs, RunArgs, SweepArgs};

/// Exit codes. Stable across versions.
pub mod exit {
    pub const OK: u8 = 0;
    pub const ERROR: u8 = 1;
    /// A condition is violated, or a guarantee failed on a graph meeting SC.
    pub const VIOLATED: u8 = 2;
    /// The graph does not meet SC, so the outcome carries no guarantee.
    pub const NOT_APPLICABLE: u8 = 3;
}

#[derive(Parser)]
#[command(name = "lbcast", version, about = "Byzantine consensus on directed graphs under local broadcast")]
struct Cli {
    /// Worker threads for checks and sweeps (default: all cores).
    #[arg(long, global = true, env = "LBCAST_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide conditions SC and NC and print a witness when violated.
    Check(CheckArgs),
    /// Run the algorithm once against one adversary.
    Run(RunArgs),
    /// Run every combination of fault set, adversary and inputs.
    Sweep(SweepArgs),
    /// Build the copy network for an NC violation and show the disagreement.
    Necessity(NecessityArgs),
    /// Write a generated graph as an edge list.
    Gen(GenArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LBCAST_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::ERROR } else { exit::OK });
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(exit::ERROR);
        }
    }
    let result = match cli.command {
        Command::Check(args) => commands::check(args),
        Command::Run(args) => commands::run(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Necessity(args) => commands::necessity(args),
        Command::Gen(args) => commands::gen(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::ERROR)
        }
    }
}
