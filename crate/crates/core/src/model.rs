//! Time-constraint semantics of an interval-constrained contract.
//!
//! A contract initialised with a closed interval `[a, b]` records two bits per
//! call: `p` (was the world time inside the interval) and `p_hat` (was the
//! injected time inside the interval). The pair maps onto one of four
//! confusion-matrix outcomes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seconds since the experiment epoch, as observed in the real world.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct WorldTime(f64);

impl WorldTime {
    pub const ZERO: WorldTime = WorldTime(0.0);

    pub fn new(seconds: f64) -> Result<Self> {
        if !seconds.is_finite() {
            return Err(Error::validation(format!(
                "world time {seconds} is not finite"
            )));
        }
        if seconds < 0.0 {
            return Err(Error::validation(format!(
                "world time {seconds} is negative"
            )));
        }
        Ok(WorldTime(seconds))
    }

    pub fn seconds(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for WorldTime {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        WorldTime::new(value)
    }
}

impl From<WorldTime> for f64 {
    fn from(t: WorldTime) -> f64 {
        t.0
    }
}

/// Whole-second block timestamp.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct BlockTimestamp(pub u64);

impl BlockTimestamp {
    pub fn seconds(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

impl fmt::Display for BlockTimestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Closed constraint interval `[a, b]` in whole seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintInterval {
    a: u64,
    b: u64,
}

impl ConstraintInterval {
    pub fn new(a: u64, b: u64) -> Result<Self> {
        if a > b {
            return Err(Error::validation(format!(
                "constraint interval [{a}, {b}] has lower bound above upper bound"
            )));
        }
        Ok(ConstraintInterval { a, b })
    }

    pub fn lower(&self) -> u64 {
        self.a
    }

    pub fn upper(&self) -> u64 {
        self.b
    }

    /// Closed membership test: `a <= t <= b`.
    pub fn contains(&self, t: f64) -> bool {
        self.a as f64 <= t && t <= self.b as f64
    }
}

impl fmt::Display for ConstraintInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

/// Experiment window `[start, end]` in seconds over which calls are sent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        let w = Window { start, end };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.end.is_finite()) {
            return Err(Error::validation("experiment window bounds must be finite"));
        }
        if self.start < 0.0 || self.start > self.end {
            return Err(Error::validation(format!(
                "experiment window [{}, {}] must satisfy 0 <= start <= end",
                self.start, self.end
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn covers(&self, interval: &ConstraintInterval) -> bool {
        self.start <= interval.lower() as f64 && interval.upper() as f64 <= self.end
    }
}

/// The `(p, p_hat)` pair a contract call writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContractState {
    pub p: bool,
    pub p_hat: bool,
}

impl ContractState {
    pub fn outcome(self) -> Outcome {
        match (self.p, self.p_hat) {
            (true, true) => Outcome::TruePositive,
            (true, false) => Outcome::FalseNegative,
            (false, true) => Outcome::FalsePositive,
            (false, false) => Outcome::TrueNegative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "TP")]
    TruePositive,
    #[serde(rename = "FP")]
    FalsePositive,
    #[serde(rename = "TN")]
    TrueNegative,
    #[serde(rename = "FN")]
    FalseNegative,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [
        Outcome::TruePositive,
        Outcome::FalsePositive,
        Outcome::TrueNegative,
        Outcome::FalseNegative,
    ];

    pub fn short(self) -> &'static str {
        match self {
            Outcome::TruePositive => "TP",
            Outcome::FalsePositive => "FP",
            Outcome::TrueNegative => "TN",
            Outcome::FalseNegative => "FN",
        }
    }

    /// True when world time and injected time lead to the same branch.
    pub fn is_correct(self) -> bool {
        matches!(self, Outcome::TruePositive | Outcome::TrueNegative)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "TP" => Ok(Outcome::TruePositive),
            "FP" => Ok(Outcome::FalsePositive),
            "TN" => Ok(Outcome::TrueNegative),
            "FN" => Ok(Outcome::FalseNegative),
            other => Err(Error::validation(format!("unknown outcome tag `{other}`"))),
        }
    }
}

/// Evaluates the contract for one call and returns the state it writes.
pub fn evaluate(world: WorldTime, injected: f64, interval: &ConstraintInterval) -> ContractState {
    ContractState {
        p: interval.contains(world.seconds()),
        p_hat: interval.contains(injected),
    }
}

/// Confusion-matrix outcome for a world time and its block timestamp.
pub fn classify(
    world: WorldTime,
    injected: BlockTimestamp,
    interval: &ConstraintInterval,
) -> Outcome {
    evaluate(world, injected.as_f64(), interval).outcome()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn n(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accumulate(mut self, outcome: Outcome) -> Self {
        self.record(outcome);
        self
    }

    pub fn record(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::TruePositive => self.tp += 1,
            Outcome::FalsePositive => self.fp += 1,
            Outcome::TrueNegative => self.tn += 1,
            Outcome::FalseNegative => self.fn_ += 1,
        }
    }

    pub fn get(&self, outcome: Outcome) -> u64 {
        match outcome {
            Outcome::TruePositive => self.tp,
            Outcome::FalsePositive => self.fp,
            Outcome::TrueNegative => self.tn,
            Outcome::FalseNegative => self.fn_,
        }
    }

    pub fn correct(&self) -> u64 {
        self.tp + self.tn
    }

    pub fn merge(&self, other: &ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            tn: self.tn + other.tn,
            fn_: self.fn_ + other.fn_,
        }
    }
}

impl FromIterator<Outcome> for ConfusionCounts {
    fn from_iter<I: IntoIterator<Item = Outcome>>(iter: I) -> Self {
        iter.into_iter()
            .fold(ConfusionCounts::default(), ConfusionCounts::accumulate)
    }
}

/// One contract call as it played out on the simulated chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransactionRecord {
    pub id: u64,
    pub sent_at: WorldTime,
    /// Timestamp of the including block.
    pub block_timestamp: BlockTimestamp,
    /// Time the contract observed, resolved under the run's injection method.
    pub injected_at: f64,
    pub block_height: u64,
}

impl TransactionRecord {
    pub fn offset(&self) -> f64 {
        self.injected_at - self.sent_at.seconds()
    }

    pub fn state(&self, interval: &ConstraintInterval) -> ContractState {
        evaluate(self.sent_at, self.injected_at, interval)
    }
}
