//! Discrete-event chain simulator.
//!
//! A single node receives transactions after a network delay, optionally
//! holds them until the next recommit boundary, and seals a block every
//! `blocktime` seconds containing everything that became eligible strictly
//! before the sealing instant. Blocks keep being produced past the end of the
//! experiment window until the mempool is empty.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::injection::{
    assign_block_timestamp, inject_parameter, injected_time_of, InjectionMethod, TimestampPolicy,
};
use crate::latency::LatencyModel;
use crate::model::{
    BlockTimestamp, ConstraintInterval, ContractState, Outcome, TransactionRecord, Window,
    WorldTime,
};
use crate::seed;

/// Timestamp of the implicit genesis block at height 0.
pub const GENESIS_TIMESTAMP: BlockTimestamp = BlockTimestamp(0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Seconds between block productions (and the increment for `ParentPlusBlocktime`).
    pub blocktime: u64,
    /// Aggregation period; 0 makes transactions eligible on arrival.
    pub recommit_interval: f64,
    pub latency: LatencyModel,
    pub policy: TimestampPolicy,
    pub method: InjectionMethod,
    pub interval: ConstraintInterval,
    pub window: Window,
    /// Transactions sent per second.
    pub tx_rate: f64,
}

impl SimConfig {
    /// Zero-latency, one-second-blocktime chain stamping blocks with the floor of the wall clock.
    pub fn deterministic(interval: ConstraintInterval, window: Window) -> Self {
        SimConfig {
            blocktime: 1,
            recommit_interval: 0.0,
            latency: LatencyModel::ZERO,
            policy: TimestampPolicy::WallClockFloor,
            method: InjectionMethod::BlockTimestamp,
            interval,
            window,
            tx_rate: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocktime < 1 {
            return Err(Error::validation("blocktime must be at least 1 second"));
        }
        if !(self.recommit_interval.is_finite() && self.recommit_interval >= 0.0) {
            return Err(Error::validation(format!(
                "recommit interval {} must be finite and non-negative",
                self.recommit_interval
            )));
        }
        if !(self.tx_rate.is_finite() && self.tx_rate > 0.0) {
            return Err(Error::validation(format!(
                "transaction rate {} must be positive",
                self.tx_rate
            )));
        }
        self.latency.validate()?;
        self.window.validate()?;
        if !self.window.covers(&self.interval) {
            return Err(Error::validation(format!(
                "experiment window [{}, {}] does not contain constraint interval {}",
                self.window.start, self.window.end, self.interval
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub height: u64,
    pub timestamp: BlockTimestamp,
    pub production_time: f64,
}

/// When a transaction reached the node and when it could first be included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    pub arrived_at: f64,
    pub eligible_at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    /// One record per transaction, ordered by send time (and id).
    pub records: Vec<TransactionRecord>,
    /// Delivery times, indexed like `records`.
    pub deliveries: Vec<Delivery>,
    /// Produced blocks, heights 1.., including empty ones.
    pub blocks: Vec<Block>,
    pub config: SimConfig,
    pub seed: u64,
}

/// A record together with the contract state it produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classified {
    pub record: TransactionRecord,
    pub state: ContractState,
    pub outcome: Outcome,
}

/// Send times `start + k / rate` strictly below `end`.
pub fn schedule_transactions(window: Window, rate: f64) -> Vec<WorldTime> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Vec::new();
    }
    (0u64..)
        .map(|k| window.start + k as f64 / rate)
        .take_while(|t| *t < window.end)
        .map(|t| WorldTime::new(t).expect("window bounds validated"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    // Declaration order is the tie-break at equal times: a block sealed at
    // instant t never sees transactions that become eligible at t.
    Produce { height: u64 },
    Send { id: u64 },
    Arrive { id: u64 },
    Eligible { id: u64 },
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.kind.cmp(&other.kind))
    }
}

fn eligibility(arrived_at: f64, recommit_interval: f64) -> f64 {
    if recommit_interval > 0.0 {
        (arrived_at / recommit_interval).ceil() * recommit_interval
    } else {
        arrived_at
    }
}

/// Runs one simulation. Deterministic in `(config, seed)`.
pub fn run_simulation(config: &SimConfig, seed: u64) -> Result<SimTrace> {
    config.validate()?;
    let sends = schedule_transactions(config.window, config.tx_rate);
    let n = sends.len();
    let sampler = config.latency.sampler()?;
    let mut rng = seed::stream(seed, "latency");

    let mut queue: BinaryHeap<Reverse<Event>> = BinaryHeap::with_capacity(2 * n + 1);
    for (id, t) in sends.iter().enumerate() {
        queue.push(Reverse(Event {
            time: t.seconds(),
            kind: EventKind::Send { id: id as u64 },
        }));
    }

    let blocktime = config.blocktime;
    if n > 0 {
        queue.push(Reverse(Event {
            time: blocktime as f64,
            kind: EventKind::Produce { height: 1 },
        }));
    }

    let mut deliveries = vec![
        Delivery {
            arrived_at: f64::NAN,
            eligible_at: f64::NAN
        };
        n
    ];
    let mut included: Vec<Option<(u64, BlockTimestamp)>> = vec![None; n];
    let mut mempool: Vec<u64> = Vec::new();
    let mut blocks = Vec::new();
    let mut parent = GENESIS_TIMESTAMP;
    let mut remaining = n;

    while let Some(Reverse(event)) = queue.pop() {
        match event.kind {
            EventKind::Send { id } => {
                let delay = sampler.sample(&mut rng);
                if !(delay.is_finite() && delay >= 0.0) {
                    return Err(Error::Internal(format!(
                        "latency model produced delay {delay}"
                    )));
                }
                let arrived_at = event.time + delay;
                queue.push(Reverse(Event {
                    time: arrived_at,
                    kind: EventKind::Arrive { id },
                }));
            }
            EventKind::Arrive { id } => {
                let eligible_at = eligibility(event.time, config.recommit_interval);
                deliveries[id as usize] = Delivery {
                    arrived_at: event.time,
                    eligible_at,
                };
                queue.push(Reverse(Event {
                    time: eligible_at,
                    kind: EventKind::Eligible { id },
                }));
            }
            EventKind::Eligible { id } => mempool.push(id),
            EventKind::Produce { height } => {
                let production = WorldTime::new(event.time)?;
                let timestamp =
                    assign_block_timestamp(config.policy, parent, production, blocktime);
                mempool.sort_by(|x, y| {
                    deliveries[*x as usize]
                        .arrived_at
                        .total_cmp(&deliveries[*y as usize].arrived_at)
                        .then(x.cmp(y))
                });
                for id in mempool.drain(..) {
                    included[id as usize] = Some((height, timestamp));
                    remaining -= 1;
                }
                blocks.push(Block {
                    height,
                    timestamp,
                    production_time: event.time,
                });
                parent = timestamp;
                if remaining > 0 {
                    queue.push(Reverse(Event {
                        time: ((height + 1) * blocktime) as f64,
                        kind: EventKind::Produce { height: height + 1 },
                    }));
                }
            }
        }
    }

    let mut records = Vec::with_capacity(n);
    for (id, (sent_at, inclusion)) in sends.iter().zip(&included).enumerate() {
        let (block_height, block_timestamp) = inclusion.ok_or(Error::IncompleteTrace(id as u64))?;
        let mut record = TransactionRecord {
            id: id as u64,
            sent_at: *sent_at,
            block_timestamp,
            injected_at: block_timestamp.as_f64(),
            block_height,
        };
        let carried = match config.method {
            InjectionMethod::Parameter => Some(inject_parameter(*sent_at)),
            InjectionMethod::BlockTimestamp => None,
        };
        record.injected_at = injected_time_of(&record, config.method, carried)?;
        records.push(record);
    }

    Ok(SimTrace {
        records,
        deliveries,
        blocks,
        config: *config,
        seed,
    })
}

/// Applies the contract to every record of a complete trace, preserving order.
pub fn classify_trace(trace: &SimTrace, interval: &ConstraintInterval) -> Result<Vec<Classified>> {
    trace
        .records
        .iter()
        .map(|record| {
            if record.block_height == 0 {
                return Err(Error::IncompleteTrace(record.id));
            }
            let state = record.state(interval);
            Ok(Classified {
                record: *record,
                state,
                outcome: state.outcome(),
            })
        })
        .collect()
}
