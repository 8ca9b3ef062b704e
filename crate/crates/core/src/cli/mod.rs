//! Command-line front end: scenario ingestion, dispatch, reports.
//!
//! `wander-lab <command> --scenario <path> [--config <path>] [--out <dir>]`.
//! Exit codes separate mathematics from plumbing: 0 for a definite verdict,
//! 2 when the mathematics answers "undetermined" or a limit refused to
//! converge, 1 for genuine errors (bad files, violated preconditions).

pub mod report;
pub mod runner;
pub mod scenario;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use crate::Error;

#[derive(Parser)]
#[command(
    name = "wander-lab",
    version,
    about = "Linearization, covering towers, and deformation dimensions of wandering-domain models"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandKind,
}

#[derive(Subcommand, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Classify an inner-function sequence (contracting / semi-contracting /
    /// eventually isometric).
    Classify,
    /// Compute the linearizing coordinate on a sampled grid with a Cauchy
    /// certificate and functional-equation residuals.
    Linearize,
    /// Build the quotient-surface model (carrier kind plus marked points).
    Quotient,
    /// Check the exact bookkeeping of a power-map tower and its rotation
    /// corrections.
    TowerVerify,
    /// Sample grand-orbit slices and decide discreteness.
    Orbit,
    /// Tabulate injectivity-radius decay along a tower orbit.
    InjDecay,
    /// Combine component reports into a deformation-dimension verdict.
    TeichDim,
    /// Run every command that applies to the scenario's payload.
    All,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Linearize => "linearize",
            Command::Quotient => "quotient",
            Command::TowerVerify => "tower-verify",
            Command::Orbit => "orbit",
            Command::InjDecay => "inj-decay",
            Command::TeichDim => "teich-dim",
            Command::All => "all",
        }
    }
}

#[derive(Subcommand)]
enum CommandKind {
    Classify(RunArgs),
    Linearize(RunArgs),
    Quotient(RunArgs),
    TowerVerify(RunArgs),
    Orbit(RunArgs),
    InjDecay(RunArgs),
    TeichDim(RunArgs),
    All(RunArgs),
}

impl CommandKind {
    fn split(self) -> (Command, RunArgs) {
        match self {
            CommandKind::Classify(a) => (Command::Classify, a),
            CommandKind::Linearize(a) => (Command::Linearize, a),
            CommandKind::Quotient(a) => (Command::Quotient, a),
            CommandKind::TowerVerify(a) => (Command::TowerVerify, a),
            CommandKind::Orbit(a) => (Command::Orbit, a),
            CommandKind::InjDecay(a) => (Command::InjDecay, a),
            CommandKind::TeichDim(a) => (Command::TeichDim, a),
            CommandKind::All(a) => (Command::All, a),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Optional config file overriding scenario options.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for the report and plot tables; stdout only when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() {
    if let Ok(raw) = std::env::var("WANDER_LAB_THREADS") {
        if let Ok(n) = raw.trim().parse::<usize>() {
            // Ignore failure: the global pool may already exist.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

/// Parses arguments from the environment, runs the command, prints the
/// report, and returns the process exit code.
pub fn run_cli() -> i32 {
    configure_threads();
    let cli = Cli::parse();
    let (command, args) = cli.command.split();
    match runner::execute(command, &args.scenario, args.config.as_deref(), args.out.as_deref()) {
        Ok((report, exit)) => {
            print!("{}", report.render());
            exit
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Undetermined(_) | Error::NonConvergent { .. } => 2,
                _ => 1,
            }
        }
    }
}
