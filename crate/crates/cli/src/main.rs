use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use pilot_ofdm_cli::cli::{execute, Cli};
use pilot_ofdm_cli::CliError;

fn run() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help, --version
            e.print()?;
            return Ok(());
        }
        Err(e) => {
            let msg = e.to_string();
            return Err(CliError::Usage(msg.trim_start_matches("error: ").trim_end().to_string()));
        }
    };
    let (text, path) = execute(&cli)?;
    match path {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pilot-ofdm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
