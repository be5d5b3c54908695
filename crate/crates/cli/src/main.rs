use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use grassgeo_cli::{configure_threads, run, Cli, CliError};

fn emit(cli: &Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let outcome = run(cli)?;
    match &cli.command.common().output {
        Some(path) => std::fs::write(path, outcome.body.as_bytes())?,
        None => std::io::stdout().lock().write_all(outcome.body.as_bytes())?,
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match emit(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("grassgeo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
