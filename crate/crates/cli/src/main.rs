//! Command-line front end for the monospde experiments.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "monospde", version, about = "Drift-implicit FEM experiments for monotone SPDEs")]
pub struct Cli {
    /// Key-value config file; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Top-level seed (overrides noise.seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of Monte Carlo paths (overrides experiment.paths).
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Run even when a hypothesis or step-size bound fails.
    #[arg(long = "override", global = true)]
    pub override_checks: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the structural hypotheses of the configured problem.
    Check,
    /// Simulate one trajectory and record observables.
    Simulate,
    /// Coupling contraction of two trajectories under common noise.
    Coupling,
    /// Moment stability against the exponential envelope.
    Stability,
    /// Ergodic time average of a functional.
    Ergodic,
    /// Decay of an ensemble mean toward the invariant mean.
    Mixing,
    /// Strong error rate against a fine reference.
    Converge {
        /// Refinement axis: `tau` or `h` (overrides converge.axis).
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated step sizes (tau axis) or cell counts (h axis).
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<f64>>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(outcome) => {
            for line in &outcome.messages {
                eprintln!("{line}");
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code_for(&e))
        }
    }
}
