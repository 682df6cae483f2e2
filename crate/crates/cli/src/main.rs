use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use unitary_vqe_cli::{run, Command, CommonOptions};

#[derive(Parser)]
#[command(
    name = "uvqe",
    version,
    about = "Riemannian gradient descent experiments on the unitary group"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Objective gap versus iteration for several circuit depths.
    Convergence(Common),
    /// Initial gap versus rotation scale and qubit count.
    InitSweep(Common),
    /// Uniform versus coefficient-weighted shot allocation.
    Shots(Common),
    /// Critical points of the single-unitary objective.
    Landscape(Common),
    /// Pauli decomposition of a dense matrix.
    Decompose(Common),
}

#[derive(Args)]
struct Common {
    /// TOML file with configuration keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Override a configuration key, e.g. `--set n=4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Convergence(c) => (Command::Convergence, c),
        Cmd::InitSweep(c) => (Command::InitSweep, c),
        Cmd::Shots(c) => (Command::Shots, c),
        Cmd::Landscape(c) => (Command::Landscape, c),
        Cmd::Decompose(c) => (Command::Decompose, c),
    };
    let opts = CommonOptions {
        config: common.config,
        seed: common.seed,
        trials: common.trials,
        out: common.out,
        threads: common.threads,
        overrides: common.overrides,
    };
    match run(command, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("uvqe {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
