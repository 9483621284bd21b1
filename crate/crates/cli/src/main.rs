mod args;
mod commands;
mod error;
mod input;
mod output;

use std::process::ExitCode;

use clap::Parser;
use cohq::guard::{Guard, GUARD_ENV};

use crate::args::Cli;
use crate::error::CliError;

fn report(e: &CliError) {
    eprintln!("error: {e}");
    if let CliError::Core(cohq::Error::GuardExceeded { .. }) = e {
        eprintln!("hint: set {GUARD_ENV} to raise the dense-dimension limit");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Guard::from_env()
        .map_err(CliError::from)
        .and_then(|guard| commands::run(&cli, &guard))
        .and_then(|out| {
            out.artifact.write(cli.output.as_deref())?;
            Ok(out.holds)
        });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: at least one checked property failed");
            ExitCode::from(1)
        }
        Err(e) => {
            report(&e);
            ExitCode::from(2)
        }
    }
}
