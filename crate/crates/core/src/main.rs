use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use budgeted_bandits::harness::output::{to_json_string, trace_csv};
use budgeted_bandits::harness::{
    all_bounds, materialize_lower_bound, prepare, run_prepared, run_single, sweep, sweep_csv,
    EnvSpec, RunSpec,
};
use budgeted_bandits::{BanditError, LowerBoundSpec};

#[derive(Parser)]
#[command(name = "bbandit", version, about = "Budget-constrained multiple-play bandit simulator")]
struct Cli {
    /// Overrides `base_seed` in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replications and print a regret report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the round-by-round trace of replication 0 as CSV.
        #[arg(long)]
        trace_csv: Option<PathBuf>,
    },
    /// Print every applicable regret bound with its constituents.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the lower-bound instance and write it as JSON.
    Lbenv {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regret against budget, one CSV row per budget.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        budgets: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failures caused by the user's input exit with 2, everything else with 1.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<BanditError> for Failure {
    fn from(e: BanditError) -> Self {
        match e {
            BanditError::Probability(_) => Failure::Runtime(e.into()),
            _ => Failure::Config(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn load_spec(path: &Path, seed: Option<u64>) -> Result<RunSpec, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Config)?;
    let mut spec: RunSpec = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::Config)?;
    if let Some(s) = seed {
        spec.base_seed = s;
    }
    Ok(spec)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            config,
            out,
            trace_csv: trace_path,
        } => {
            let prep = prepare(&load_spec(&config, cli.seed)?)?;
            let report = run_prepared(&prep)?;
            if let Some(p) = trace_path {
                let trace = run_single(&prep, 0)?;
                fs::write(&p, trace_csv(&trace))
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            emit(&to_json_string(&report)?, out.as_deref())
        }
        Command::Bounds { config, out } => {
            let prep = prepare(&load_spec(&config, cli.seed)?)?;
            emit(&to_json_string(&all_bounds(&prep))?, out.as_deref())
        }
        Command::Lbenv { config, out } => {
            let spec = load_spec(&config, cli.seed)?;
            let lb = match &spec.environment {
                EnvSpec::LowerBound(lb) => lb.clone(),
                _ => LowerBoundSpec::default(),
            };
            let cfg = spec.config.clone().validate()?;
            let inst = materialize_lower_bound(&cfg, &lb, spec.base_seed)?;
            emit(&to_json_string(&inst)?, Some(&out))
        }
        Command::Sweep {
            config,
            budgets,
            out,
        } => {
            let rows = sweep(&load_spec(&config, cli.seed)?, &budgets)?;
            emit(&sweep_csv(&rows), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
