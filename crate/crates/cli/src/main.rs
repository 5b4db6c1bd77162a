use std::process::ExitCode;

use clap::Parser;
use pbicgstab_cli::cli::{Cli, Command};
use pbicgstab_cli::commands;
use pbicgstab_cli::experiment::UsageError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => commands::solve(args),
        Command::Bench(args) => commands::bench(args),
        Command::SweepPartitions(args) => commands::sweep_partitions(args),
        Command::History(args) => commands::history(args),
        Command::Fetch(args) => commands::fetch(args),
    };
    match result {
        Ok(done) => ExitCode::from(done.exit_code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
