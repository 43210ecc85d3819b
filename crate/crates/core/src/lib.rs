//! Deterministic simulator and measurement harness for the execution accuracy
//! of interval-constrained smart contracts under block-timestamp time injection.
//!
//! A contract call sent at world time `t` is classified by comparing whether
//! `t` and the time injected by the chain (the including block's timestamp)
//! fall inside the contract's constraint interval. Execution accuracy is the
//! share of calls for which both agree.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod injection;
pub mod latency;
pub mod metrics;
pub mod model;
pub mod report;
pub mod seed;
pub mod simulator;

pub use error::{Error, Result};
pub use experiment::{
    dip_report, preset, run_experiment, sweep_blocktime, DipReport, ExperimentConfig,
    ExperimentResult,
};
pub use injection::{assign_block_timestamp, InjectionMethod, TimestampPolicy};
pub use latency::LatencyModel;
pub use metrics::{
    average_batch_tables, batch_frequencies, execution_accuracy, injection_offsets, BatchTable,
    OffsetStats,
};
pub use model::{
    classify, BlockTimestamp, ConfusionCounts, ConstraintInterval, ContractState, Outcome,
    TransactionRecord, Window, WorldTime,
};
pub use simulator::{
    classify_trace, run_simulation, schedule_transactions, Classified, SimConfig, SimTrace,
};
