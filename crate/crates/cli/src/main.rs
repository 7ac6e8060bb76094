mod cli;
mod commands;
mod config;
mod dataset;
mod error;
mod metadata;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::cli::Cli;
use crate::error::CliError;

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Argument errors are already printed by the parser.
            if !e.to_string().is_empty() {
                eprintln!("error: {e}");
            }
            e.exit_code()
        }
    }
}

fn run() -> Result<(), CliError> {
    let (argv, config) = config::expand(std::env::args_os().collect())?;
    let mut cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.print().ok();
            return Ok(());
        }
        Err(e) => {
            e.print().ok();
            return Err(CliError::Usage(String::new()));
        }
    };
    cli.config = config;
    commands::run(&cli.command)?;
    if let Some(dir) = cli.command.out_dir() {
        metadata::write(&cli, dir)?;
    }
    Ok(())
}
