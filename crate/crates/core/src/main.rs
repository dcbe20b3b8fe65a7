use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pcflab::cli::{run, Command, Invocation, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "pcflab", version, about = "Power curvature flow experiments and non-collapsing diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Run the flow and write time series, snapshots and a summary
    Simulate(Common),
    /// Run the identity verification suite; exit 3 on any failure
    Verify(Common),
    /// Non-collapse report for the initial curve
    Noncollapse(Common),
    /// Empirical sweep for the largest preserved initial mu
    SweepMu0(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized checks, overriding the config
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let (command, common) = match cli.command {
        Sub::Simulate(c) => (Command::Simulate, c),
        Sub::Verify(c) => (Command::Verify, c),
        Sub::Noncollapse(c) => (Command::Noncollapse, c),
        Sub::SweepMu0(c) => (Command::SweepMu0, c),
    };
    let inv = Invocation { command, config: common.config, out: common.out, seed: common.seed };
    ExitCode::from(run(&inv) as u8)
}
