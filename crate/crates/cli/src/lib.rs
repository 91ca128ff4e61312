//! Command-line front end for `chsh-core`.
//!
//! Exit status is 0 on success, 1 when `verify` finds a gap above its
//! tolerance, and 2 for invalid input of any kind.

pub mod args;
pub mod commands;
pub mod output;

use anyhow::Result;

pub use args::{Cli, Command};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    CheckFailed,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::CheckFailed => 1,
        }
    }
}

/// Exit status for errors (bad flags, unreadable or invalid state files).
pub const ERROR_EXIT: i32 = 2;

pub fn run(cli: &Cli) -> Result<Outcome> {
    cli.command.validate()?;
    match &cli.command {
        Command::Optimize(a) => commands::optimize(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Simulate(a) => commands::simulate_cmd(a),
        Command::PaperExamples(a) => commands::paper_examples(a),
    }
}
