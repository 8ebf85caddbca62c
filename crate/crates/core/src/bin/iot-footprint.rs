use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use iot_footprint::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = match execute(&cli) {
        Ok(out) => out,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &output),
        None => std::io::stdout().write_all(output.as_bytes()),
    };
    if let Err(err) = written {
        eprintln!("error: writing output: {err}");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
