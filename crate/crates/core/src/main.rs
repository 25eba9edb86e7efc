//! Command-line entry point. See the library's `cli` module for the run
//! configuration format and the per-command behavior.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ofdi::cli::{
    cmd_equilibrium, cmd_estimate, cmd_event_study, cmd_figure4, cmd_simulate, cmd_validate,
    CommandOutput, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "ofdi",
    about = "Vertical-OFDI model toolkit: probability curves, input-market equilibria, synthetic panels, and DID estimation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for data files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Root seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Replication count override.
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Investment-probability curves over a domestic-cost grid.
    Figure4(CommonArgs),
    /// Ban experiment on the configured input market.
    Equilibrium(CommonArgs),
    /// Simulate a synthetic firm-year panel.
    Simulate(CommonArgs),
    /// Estimate the treatment effect on a panel CSV (all build-up levels).
    Estimate(CommonArgs),
    /// Event-study coefficients and the joint pre-policy test.
    EventStudy(CommonArgs),
    /// Monte Carlo validation of the simulate -> estimate pipeline.
    Validate(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Figure4(c)
            | Command::Equilibrium(c)
            | Command::Simulate(c)
            | Command::Estimate(c)
            | Command::EventStudy(c)
            | Command::Validate(c) => c,
        }
    }
}

fn run(cli: Cli) -> ofdi::Result<CommandOutput> {
    let common = cli.command.common();
    let mut config = match &common.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if common.seed.is_some() {
        config.seed = common.seed;
    }
    if common.reps.is_some() {
        config.reps = common.reps;
    }
    let out = &common.out;
    match &cli.command {
        Command::Figure4(_) => cmd_figure4(&config, out),
        Command::Equilibrium(_) => cmd_equilibrium(&config, out),
        Command::Simulate(_) => cmd_simulate(&config, out),
        Command::Estimate(_) => cmd_estimate(&config, out),
        Command::EventStudy(_) => cmd_event_study(&config, out),
        Command::Validate(_) => cmd_validate(&config, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(output) => {
            println!("{}", output.summary);
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
