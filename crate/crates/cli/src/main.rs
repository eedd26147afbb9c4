mod analyze;
mod args;
mod commands;
mod config;
mod error;
mod kernel;
mod report;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::CliError;

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("SCHATLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("SCHATLAB_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run() -> Result<(), CliError> {
    let argv = config::expand(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            std::process::exit(code);
        }
    };
    init_threads()?;
    let output = match &cli.command {
        Command::Analyze(a) => analyze::run(a)?,
        Command::Trace(a) => commands::trace(a)?,
        Command::Powers(a) => commands::powers(a)?,
        Command::Su2(a) => commands::su2(a)?,
        Command::Weyl(a) => commands::weyl(a)?,
        Command::Carleman(a) => commands::carleman(a)?,
    };
    output.emit(cli.command.common())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("schatlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
