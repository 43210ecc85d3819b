//! CSV and summary files written by the command-line tool.
//!
//! Numbers are written in shortest round-trip decimal form, so every file
//! parses back to exactly the values that produced it.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{DipReport, ExperimentConfig, ExperimentResult};
use crate::metrics::{Batch, Frequencies, OffsetStats};
use crate::model::{ConfusionCounts, Outcome};
use crate::simulator::{Block, Classified};

pub const TRACE_FILE: &str = "trace.csv";
pub const BLOCKS_FILE: &str = "blocks.csv";
pub const BATCHES_FILE: &str = "batches.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const DIPS_FILE: &str = "dips.csv";
pub const TRACES_DIR: &str = "traces";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub id: u64,
    pub sent_at_s: f64,
    pub injected_at_s: f64,
    pub block_height: u64,
    pub p: u8,
    pub p_hat: u8,
    pub outcome: Outcome,
}

impl From<&Classified> for TraceRow {
    fn from(c: &Classified) -> Self {
        TraceRow {
            id: c.record.id,
            sent_at_s: c.record.sent_at.seconds(),
            injected_at_s: c.record.injected_at,
            block_height: c.record.block_height,
            p: c.state.p as u8,
            p_hat: c.state.p_hat as u8,
            outcome: c.outcome,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRow {
    pub height: u64,
    pub timestamp_s: u64,
    pub production_time_s: f64,
}

impl From<&Block> for BlockRow {
    fn from(b: &Block) -> Self {
        BlockRow {
            height: b.height,
            timestamp_s: b.timestamp.0,
            production_time_s: b.production_time,
        }
    }
}

/// One batch; frequency and accuracy cells are blank for empty batches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub batch_start_s: i64,
    pub count: u64,
    pub freq_tp: Option<f64>,
    pub freq_fp: Option<f64>,
    pub freq_tn: Option<f64>,
    pub freq_fn: Option<f64>,
    pub accuracy: Option<f64>,
}

impl From<&Batch> for BatchRow {
    fn from(b: &Batch) -> Self {
        BatchRow {
            batch_start_s: b.batch_start,
            count: b.count,
            freq_tp: b.freqs.map(|f| f.tp),
            freq_fp: b.freqs.map(|f| f.fp),
            freq_tn: b.freqs.map(|f| f.tn),
            freq_fn: b.freqs.map(|f| f.fn_),
            accuracy: b.accuracy(),
        }
    }
}

impl BatchRow {
    pub fn to_batch(&self) -> Batch {
        let freqs = match (self.freq_tp, self.freq_fp, self.freq_tn, self.freq_fn) {
            (Some(tp), Some(fp), Some(tn), Some(fn_)) => Some(Frequencies { tp, fp, tn, fn_ }),
            _ => None,
        };
        Batch {
            batch_start: self.batch_start_s,
            count: self.count,
            freqs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipRow {
    pub blocktime_s: u64,
    pub pre_lower_width_s: u64,
    pub in_upper_width_s: u64,
    pub post_upper_width_s: u64,
    pub overall_accuracy: f64,
}

impl DipRow {
    pub fn new(blocktime: u64, dips: &DipReport, overall_accuracy: f64) -> Self {
        DipRow {
            blocktime_s: blocktime,
            pre_lower_width_s: dips.pre_lower_width,
            in_upper_width_s: dips.in_interval_upper_width,
            post_upper_width_s: dips.post_upper_width,
            overall_accuracy,
        }
    }
}

/// Experiment summary; field order is the on-disk key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub label: String,
    pub overall_accuracy: f64,
    pub per_round_accuracy: Vec<f64>,
    pub counts: ConfusionCounts,
    pub offsets: OffsetStats,
    pub round_seeds: Vec<u64>,
    pub config: ExperimentConfig,
}

impl From<&ExperimentResult> for Summary {
    fn from(r: &ExperimentResult) -> Self {
        Summary {
            label: r.config.label.clone(),
            overall_accuracy: r.overall_accuracy,
            per_round_accuracy: r.per_round_accuracy.clone(),
            counts: r.counts,
            offsets: r.offsets,
            round_seeds: r.rounds.iter().map(|round| round.seed).collect(),
            config: r.config.clone(),
        }
    }
}

/// Paths written for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub batch_csv_path: PathBuf,
    /// One trace file per round, in round order.
    pub trace_csv_paths: Vec<PathBuf>,
    pub summary_path: PathBuf,
    pub summary: Summary,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn write_csv<'a, T, I>(path: &Path, rows: I) -> Result<()>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = T>,
{
    let mut writer = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for row in rows {
        writer.serialize(row).map_err(csv_err(path))?;
    }
    writer.flush().map_err(io_err(path))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err(path))
}

pub fn write_trace_csv(path: &Path, classified: &[Classified]) -> Result<()> {
    write_csv(path, classified.iter().map(TraceRow::from))
}

pub fn write_blocks_csv(path: &Path, blocks: &[Block]) -> Result<()> {
    write_csv(path, blocks.iter().map(BlockRow::from))
}

pub fn write_batch_csv(path: &Path, batches: &[Batch]) -> Result<()> {
    write_csv(path, batches.iter().map(BatchRow::from))
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)
        .map_err(|e| Error::Internal(format!("summary serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Error::validation(format!("{}: {e}", path.display())))
}

/// Accuracy recomputed from trace rows, `(TP + TN) / n`.
pub fn accuracy_from_trace_rows(rows: &[TraceRow]) -> Result<f64> {
    let counts: ConfusionCounts = rows.iter().map(|r| r.outcome).collect();
    crate::metrics::accuracy_of_counts(&counts)
}

/// Count-weighted mean of batch-row accuracies.
pub fn accuracy_from_batch_rows(rows: &[BatchRow]) -> Result<f64> {
    let table = crate::metrics::BatchTable {
        window: crate::model::Window {
            start: 0.0,
            end: 0.0,
        },
        batches: rows.iter().map(BatchRow::to_batch).collect(),
    };
    table.weighted_accuracy()
}

/// Writes batches, per-round traces and the summary of `result` under `dir`.
pub fn write_experiment(dir: &Path, result: &ExperimentResult) -> Result<ReportBundle> {
    ensure_dir(dir)?;
    let traces_dir = dir.join(TRACES_DIR);
    ensure_dir(&traces_dir)?;

    let batch_csv_path = dir.join(BATCHES_FILE);
    write_batch_csv(&batch_csv_path, &result.averaged.batches)?;

    let trace_csv_paths = result
        .rounds
        .iter()
        .map(|round| {
            let path = traces_dir.join(format!("round_{:03}.csv", round.round));
            write_trace_csv(&path, &round.classified).map(|_| path)
        })
        .collect::<Result<Vec<_>>>()?;

    let summary = Summary::from(result);
    let summary_path = dir.join(SUMMARY_FILE);
    write_summary(&summary_path, &summary)?;

    Ok(ReportBundle {
        batch_csv_path,
        trace_csv_paths,
        summary_path,
        summary,
    })
}
