//! Experiment harness binary: `run`, `tune`, `gen-data`, and `eval-crit`
//! verbs over flat key-value experiment configs.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use ssdc_cli::config::ExperimentConfig;
use ssdc_cli::experiment;

#[derive(Parser)]
#[command(
    name = "ssdc",
    version,
    about = "Stagewise stochastic optimization of difference-of-convex objectives"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Replace the config's seed list (or the tuning holdout) with one seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write outputs under this directory instead of the config's.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Record the criticality measure every N stages (0 = never).
    #[arg(long, global = true)]
    trace_stride: Option<usize>,

    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run every variant × seed replicate of an experiment config.
    Run {
        /// Experiment config file (flat `key = value` text).
        config: PathBuf,
    },
    /// Sweep the config's tuning grid on a holdout seed and report the best value.
    Tune {
        /// Experiment config file containing a tune.* block.
        config: PathBuf,
    },
    /// Sample the config's synthetic spec and write it as a libsvm file.
    GenData {
        /// Config file whose problem.source is synthetic.
        spec: PathBuf,
        /// Output path for the libsvm text.
        out: PathBuf,
    },
    /// Evaluate the criticality measure of the config's problem at a stored iterate.
    EvalCrit {
        /// Experiment config file describing the problem.
        config: PathBuf,
        /// File of whitespace-separated coordinates.
        iterate: PathBuf,
    },
}

fn load_config(path: &PathBuf, cli: &Cli, tune_seed: bool) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_file(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    if let Some(seed) = cli.seed {
        let key = if tune_seed { "tune.seed" } else { "run.seeds" };
        cfg = cfg.with_override(key, &seed.to_string())?;
    }
    if let Some(dir) = &cli.out_dir {
        cfg = cfg.with_override("output.dir", &dir.to_string_lossy())?;
    }
    if let Some(stride) = cli.trace_stride {
        cfg = cfg.with_override("output.trace_stride", &stride.to_string())?;
    }
    Ok(cfg)
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { config } => {
            let cfg = load_config(config, &cli, false)?;
            let out = experiment::run_experiment(&cfg, cli.quiet)?;
            if out.failed == out.total {
                bail!("all {} runs failed; see {}", out.total, out.summary_path.display());
            }
            Ok(())
        }
        Command::Tune { config } => {
            let cfg = load_config(config, &cli, true)?;
            let report = experiment::tune(&cfg, cli.quiet)?;
            if report.best_value.is_none() {
                bail!("all grid points failed");
            }
            Ok(())
        }
        Command::GenData { spec, out } => {
            let cfg = load_config(spec, &cli, false)?;
            let rows = experiment::gen_data(&cfg, out)?;
            if !cli.quiet {
                println!("wrote {rows} rows to {}", out.display());
            }
            Ok(())
        }
        Command::EvalCrit { config, iterate } => {
            let cfg = load_config(config, &cli, false)?;
            let value = experiment::eval_crit(&cfg, iterate)?;
            println!("{}", serde_json::to_string_pretty(&value)?);
            Ok(())
        }
    }
}
