//! Command-line front end: `simulate`, `experiment` and `sweep`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::load_config;
use crate::error::{Error, Result};
use crate::experiment::{dip_report, preset, run_experiment, sweep_blocktime, ExperimentConfig};
use crate::report::{
    self, write_blocks_csv, write_csv, write_experiment, write_trace_csv, DipRow, ReportBundle,
};
use crate::simulator::{classify_trace, run_simulation};

#[derive(Debug, Parser)]
#[command(
    name = "timeinject",
    version,
    about = "Execution-accuracy simulator for block-timestamp time injection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write its trace and block list.
    Simulate(CommonArgs),
    /// Run a multi-round experiment and write batch table, traces and summary.
    Experiment(CommonArgs),
    /// Run one experiment per blocktime and write a dip report.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated blocktimes in seconds, e.g. `1,4,8`.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1)]
        blocktimes: Vec<u64>,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment config file (TOML with dotted keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Base preset; a config file overrides its values.
    #[arg(long, value_parser = ["local", "test"])]
    pub preset: Option<String>,
    /// Simulation seed (`simulate`) or master seed (`experiment`, `sweep`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of rounds.
    #[arg(long)]
    pub rounds: Option<u32>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        if self.config.is_none() && self.preset.is_none() {
            return Err(Error::validation("one of --config or --preset is required"));
        }
        let base = preset(self.preset.as_deref().unwrap_or("local"))?;
        let mut cfg = match &self.config {
            Some(path) => load_config(path, &base)?,
            None => base,
        };
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(rounds) = self.rounds {
            cfg.rounds = rounds;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Paths written by `simulate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOutput {
    pub trace_csv_path: PathBuf,
    pub blocks_csv_path: PathBuf,
    pub rows: usize,
}

pub fn cmd_simulate(config: &ExperimentConfig, seed: u64, out: &Path) -> Result<SimulateOutput> {
    let trace = run_simulation(&config.sim, seed)?;
    let classified = classify_trace(&trace, &config.sim.interval)?;
    report::ensure_dir(out)?;
    let trace_csv_path = out.join(report::TRACE_FILE);
    let blocks_csv_path = out.join(report::BLOCKS_FILE);
    write_trace_csv(&trace_csv_path, &classified)?;
    write_blocks_csv(&blocks_csv_path, &trace.blocks)?;
    Ok(SimulateOutput {
        trace_csv_path,
        blocks_csv_path,
        rows: classified.len(),
    })
}

pub fn cmd_experiment(config: &ExperimentConfig, out: &Path) -> Result<ReportBundle> {
    let result = run_experiment(config)?;
    write_experiment(out, &result)
}

/// Per-blocktime bundles under `out/b<blocktime>/` plus `out/dips.csv`.
pub fn cmd_sweep(
    config: &ExperimentConfig,
    blocktimes: &[u64],
    out: &Path,
) -> Result<(Vec<ReportBundle>, PathBuf)> {
    let results = sweep_blocktime(config, blocktimes)?;
    report::ensure_dir(out)?;
    let mut bundles = Vec::with_capacity(results.len());
    let mut dips = Vec::with_capacity(results.len());
    for result in &results {
        let blocktime = result.config.sim.blocktime;
        bundles.push(write_experiment(
            &out.join(format!("b{blocktime}")),
            result,
        )?);
        let report = dip_report(&result.averaged, &result.config.sim.interval)?;
        dips.push(DipRow::new(blocktime, &report, result.overall_accuracy));
    }
    let dips_path = out.join(report::DIPS_FILE);
    write_csv(&dips_path, &dips)?;
    Ok((bundles, dips_path))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = args.resolve()?;
            let output = cmd_simulate(&cfg, cfg.master_seed, &args.out)?;
            println!(
                "wrote {} ({} rows)",
                output.trace_csv_path.display(),
                output.rows
            );
            println!("wrote {}", output.blocks_csv_path.display());
        }
        Command::Experiment(args) => {
            let cfg = args.resolve()?;
            let bundle = cmd_experiment(&cfg, &args.out)?;
            println!(
                "{}: {} rounds, execution accuracy {:.6}",
                bundle.summary.label,
                bundle.summary.per_round_accuracy.len(),
                bundle.summary.overall_accuracy
            );
            println!("wrote {}", bundle.batch_csv_path.display());
            println!("wrote {}", bundle.summary_path.display());
        }
        Command::Sweep { common, blocktimes } => {
            let cfg = common.resolve()?;
            let (bundles, dips_path) = cmd_sweep(&cfg, &blocktimes, &common.out)?;
            for bundle in &bundles {
                println!(
                    "blocktime {}s: execution accuracy {:.6} -> {}",
                    bundle.summary.config.sim.blocktime,
                    bundle.summary.overall_accuracy,
                    bundle.summary_path.display()
                );
            }
            println!("wrote {}", dips_path.display());
        }
    }
    Ok(())
}
