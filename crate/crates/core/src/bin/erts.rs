use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use erts_bandit::cli::{cmd_simulate, cmd_theory, run_invariant_suite, ExperimentConfig};

#[derive(Parser)]
#[command(name = "erts", version, about = "Entropic-risk Thompson sampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Root seed; overrides `root_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of runs; overrides `n_runs`.
    #[arg(long, global = true)]
    runs: Option<usize>,

    /// Horizon; overrides `horizon`.
    #[arg(long, global = true)]
    horizon: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured policy and write CSV, JSON and plot data.
    Simulate,
    /// Write the theory report for the configured instance.
    Theory,
    /// Run the fast invariant suite; exit 1 on any failure.
    Validate,
}

impl Cli {
    fn load_config(&self) -> Result<ExperimentConfig> {
        let Some(path) = &self.config else {
            bail!("--config PATH is required for this command");
        };
        let mut config = ExperimentConfig::load(path)?;
        if let Some(seed) = self.seed {
            config.root_seed = seed;
        }
        if let Some(runs) = self.runs {
            config.n_runs = runs;
        }
        if let Some(horizon) = self.horizon {
            config.horizon = horizon;
        }
        if let Some(out) = &self.out {
            config.output.dir = out.clone();
        }
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate => {
            let config = cli.load_config()?;
            let experiment = config.validate()?;
            let outputs = cmd_simulate(&experiment, &config.output.dir).context("simulate failed")?;
            for path in [&outputs.csv, &outputs.summary, &outputs.plot] {
                println!("{}", path.display());
            }
        }
        Command::Theory => {
            let config = cli.load_config()?;
            let experiment = config.validate()?;
            let path = cmd_theory(&experiment, &config.output.dir).context("theory failed")?;
            println!("{}", path.display());
        }
        Command::Validate => {
            let seed = match &cli.config {
                Some(_) => cli.load_config()?.root_seed,
                None => cli.seed.unwrap_or(0),
            };
            let outcomes = run_invariant_suite(seed);
            for outcome in &outcomes {
                println!("{outcome}");
            }
            if outcomes.iter().any(|o| !o.passed) {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
