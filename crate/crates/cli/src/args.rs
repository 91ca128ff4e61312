use std::path::PathBuf;

use anyhow::{bail, Result};
use chsh_core::SignBranch;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "chsh", version, about = "Optimal CHSH measurement settings for two-qubit states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the optimal measurement directions for a state.
    Optimize(OptimizeArgs),
    /// Check the closed-form maximum against a brute-force search.
    Verify(VerifyArgs),
    /// Tabulate the optimal angles over a range of γ.
    Sweep(SweepArgs),
    /// Estimate S from simulated measurement shots.
    Simulate(SimulateArgs),
    /// Recompute the worked examples (pure, mixture and Werner states).
    PaperExamples(PaperExamplesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Sign {
    #[default]
    Positive,
    Negative,
}

impl From<Sign> for SignBranch {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Positive => SignBranch::Positive,
            Sign::Negative => SignBranch::Negative,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Read and print angles in degrees.
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Clone, Args)]
pub struct StrategyArgs {
    /// State description (JSON).
    #[arg(long)]
    pub state: PathBuf,
    /// Mean polar angle of the B-side directions.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gamma: f64,
    /// Rotation of the measurement plane; only used when it is not fixed by the state.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, value_enum, default_value = "positive")]
    pub sign: Sign,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub strategy: StrategyArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Also print the correlation matrix and its singular values.
    #[arg(long)]
    pub dump_k: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, default_value_t = chsh_core::oracle::DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = chsh_core::oracle::DEFAULT_REFINE_ITERS)]
    pub refine_iters: usize,
    #[arg(long, default_value_t = chsh_core::oracle::DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, default_value_t = 360)]
    pub gamma_steps: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub strategy: StrategyArgs,
    /// Shots per setting pair.
    #[arg(long, default_value_t = 10_000)]
    pub shots: u64,
    #[arg(long, env = "CHSH_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write every shot to this CSV file.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PaperExamplesArgs {
    #[command(flatten)]
    pub output: OutputArgs,
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() {
        bail!("--{name} must be finite, got {x}");
    }
    Ok(())
}

fn check_format(format: Format, allowed: &[Format], command: &str) -> Result<()> {
    if !allowed.contains(&format) {
        bail!("{command} does not support --format {format:?}");
    }
    Ok(())
}

impl StrategyArgs {
    /// `(γ, θ)` in radians.
    pub fn angles(&self, degrees: bool) -> (f64, f64) {
        if degrees {
            (self.gamma.to_radians(), self.theta.to_radians())
        } else {
            (self.gamma, self.theta)
        }
    }

    fn validate(&self, degrees: bool) -> Result<()> {
        check_finite("gamma", self.gamma)?;
        check_finite("theta", self.theta)?;
        let (_, theta) = self.angles(degrees);
        if !(0.0..std::f64::consts::PI).contains(&theta) {
            bail!("--theta must lie in [0, π), got {}", self.theta);
        }
        Ok(())
    }
}

impl Command {
    /// Rejects inconsistent flags before anything is read or computed.
    pub fn validate(&self) -> Result<()> {
        use Format::*;
        match self {
            Command::Optimize(a) => {
                check_format(a.output.format, &[Text, Json], "optimize")?;
                a.strategy.validate(a.output.degrees)
            }
            Command::Verify(a) => {
                check_format(a.output.format, &[Text, Json], "verify")?;
                if a.grid < 8 {
                    bail!("--grid must be at least 8");
                }
                if !(a.tol.is_finite() && a.tol >= 0.0) {
                    bail!("--tol must be a non-negative number");
                }
                Ok(())
            }
            Command::Sweep(a) => {
                if a.gamma_steps == 0 {
                    bail!("--gamma-steps must be at least 1");
                }
                Ok(())
            }
            Command::Simulate(a) => {
                check_format(a.output.format, &[Text, Json], "simulate")?;
                if a.shots == 0 {
                    bail!("--shots must be at least 1");
                }
                a.strategy.validate(a.output.degrees)
            }
            Command::PaperExamples(a) => check_format(a.output.format, &[Text, Json], "paper-examples"),
        }
    }
}
