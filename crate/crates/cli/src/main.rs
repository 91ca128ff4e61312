use std::process::ExitCode;

use chsh_cli::{run, Cli, ERROR_EXIT};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.code() as u8),
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(ERROR_EXIT as u8)
        }
    }
}
