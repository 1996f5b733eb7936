mod config;
mod run;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{RunArgs, RunConfig};

#[derive(Parser)]
#[command(name = "lpdg", version, about = "Lagrange-projection DG solver for the 1D isentropic Euler equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case and write solution, monitor and metadata files
    Run(RunArgs),
    /// Run a mesh sweep and tabulate errors and observed orders
    Convergence(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => RunConfig::resolve(a).and_then(|c| run::run(&c)),
        Command::Convergence(a) => RunConfig::resolve(a).and_then(|c| run::convergence(&c)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
