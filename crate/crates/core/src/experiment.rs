//! Multi-round experiments, presets, blocktime sweeps and dip analysis.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{
    accuracy_of_counts, average_batch_tables, batch_frequencies, confusion_counts, BatchTable,
    OffsetStats,
};
use crate::model::{ConfusionCounts, ConstraintInterval, Window};
use crate::seed::round_seed;
use crate::simulator::{classify_trace, run_simulation, Classified, SimConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sim: SimConfig,
    pub rounds: u32,
    pub master_seed: u64,
    pub label: String,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds < 1 {
            return Err(Error::validation("an experiment needs at least one round"));
        }
        self.sim.validate()
    }
}

/// One round's classified trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundResult {
    pub round: u32,
    pub seed: u64,
    pub classified: Vec<Classified>,
    pub counts: ConfusionCounts,
    pub table: BatchTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub averaged: BatchTable,
    pub per_round_accuracy: Vec<f64>,
    /// `(TP + TN) / n` pooled over every call of every round.
    pub overall_accuracy: f64,
    pub offsets: OffsetStats,
    pub counts: ConfusionCounts,
    pub config: ExperimentConfig,
    pub rounds: Vec<RoundResult>,
}

fn run_round(sim: &SimConfig, master_seed: u64, round: u32) -> Result<RoundResult> {
    let seed = round_seed(master_seed, round as u64);
    let trace = run_simulation(sim, seed)?;
    let classified = classify_trace(&trace, &sim.interval)?;
    let counts = confusion_counts(&classified);
    let table = batch_frequencies(&classified, sim.window)?;
    Ok(RoundResult {
        round,
        seed,
        classified,
        counts,
        table,
    })
}

/// Runs `config.rounds` independent simulations and aggregates them.
///
/// Rounds execute in parallel; results are merged in round order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let rounds: Vec<RoundResult> = (0..config.rounds)
        .into_par_iter()
        .map(|r| run_round(&config.sim, config.master_seed, r))
        .collect::<Result<_>>()?;

    let per_round_accuracy = rounds
        .iter()
        .map(|r| accuracy_of_counts(&r.counts))
        .collect::<Result<Vec<_>>>()?;
    let counts = rounds
        .iter()
        .fold(ConfusionCounts::default(), |acc, r| acc.merge(&r.counts));
    let overall_accuracy = accuracy_of_counts(&counts)?;
    let tables: Vec<BatchTable> = rounds.iter().map(|r| r.table.clone()).collect();
    let averaged = average_batch_tables(&tables)?;
    let offsets: Vec<f64> = rounds
        .iter()
        .flat_map(|r| r.classified.iter().map(|c| c.record.offset()))
        .collect();
    let offsets = OffsetStats::from_offsets(&offsets)?;

    Ok(ExperimentResult {
        averaged,
        per_round_accuracy,
        overall_accuracy,
        offsets,
        counts,
        config: config.clone(),
        rounds,
    })
}

pub const PRESET_NAMES: [&str; 2] = ["local", "test"];

/// Named experiment setups: `local` (I=[15,30], J=[0,45]) and `test` (I=[60,120], J=[0,135]).
///
/// Both send one call per second for 30 rounds on a zero-latency chain with a
/// one-second blocktime stamping blocks with the floor of the wall clock.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let (a, b, end) = match name {
        "local" => (15, 30, 45.0),
        "test" => (60, 120, 135.0),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    let sim = SimConfig::deterministic(ConstraintInterval::new(a, b)?, Window::new(0.0, end)?);
    Ok(ExperimentConfig {
        sim,
        rounds: 30,
        master_seed: 0,
        label: name.to_string(),
    })
}

/// One experiment per blocktime; every point reuses the base master seed.
pub fn sweep_blocktime(
    base: &ExperimentConfig,
    blocktimes: &[u64],
) -> Result<Vec<ExperimentResult>> {
    if blocktimes.is_empty() {
        return Err(Error::validation(
            "blocktime sweep needs at least one blocktime",
        ));
    }
    if let Some(bad) = blocktimes.iter().find(|b| **b < 1) {
        return Err(Error::validation(format!(
            "blocktime {bad} is below 1 second"
        )));
    }
    blocktimes
        .iter()
        .map(|&blocktime| {
            let config = ExperimentConfig {
                sim: SimConfig {
                    blocktime,
                    ..base.sim
                },
                ..base.clone()
            };
            run_experiment(&config)
        })
        .collect()
}

/// Widths, in one-second batches, of the accuracy dips flanking each bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DipReport {
    /// Run ending at batch `a - 1`.
    pub pre_lower_width: u64,
    /// Run starting at batch `a`.
    pub in_interval_lower_width: u64,
    /// Run ending at batch `b - 1`.
    pub in_interval_upper_width: u64,
    /// Run starting at batch `b`.
    pub post_upper_width: u64,
}

fn is_dip(table: &BatchTable, batch_start: i64) -> bool {
    table
        .batch(batch_start)
        .and_then(|b| b.accuracy())
        .is_some_and(|acc| acc < 1.0)
}

fn run_width(table: &BatchTable, from: i64, step: i64, stop: Option<i64>) -> u64 {
    let mut width = 0;
    let mut at = from;
    while stop.is_none_or(|s| if step > 0 { at <= s } else { at >= s }) && is_dip(table, at) {
        width += 1;
        at += step;
    }
    width
}

pub fn dip_report(table: &BatchTable, interval: &ConstraintInterval) -> Result<DipReport> {
    let a = interval.lower() as i64;
    let b = interval.upper() as i64;
    if table.batch(a).is_none() || table.batch(b).is_none() {
        return Err(Error::validation(format!(
            "interval {interval} is not covered by the batch table"
        )));
    }
    Ok(DipReport {
        pre_lower_width: run_width(table, a - 1, -1, None),
        in_interval_lower_width: run_width(table, a, 1, Some(b - 1)),
        in_interval_upper_width: run_width(table, b - 1, -1, Some(a)),
        post_upper_width: run_width(table, b, 1, None),
    })
}
