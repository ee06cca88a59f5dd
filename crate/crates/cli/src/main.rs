//! `oscphase` command-line interface.
//!
//! Exit status is 0 on success and 1 on any failure, in which case the first
//! word on standard error is the error name (for example `QNotPositive`).

mod args;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("UsageError: {}", e.render().to_string().trim_end());
            return ExitCode::FAILURE;
        }
    };
    let result = match &cli.command {
        Command::Solve(args) => run::solve(args),
        Command::Experiment(args) => run::experiment(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}: {e:#}", run::error_name(&e));
            ExitCode::FAILURE
        }
    }
}
