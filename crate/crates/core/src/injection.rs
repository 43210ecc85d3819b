//! Time-injection methods and miner timestamp policies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BlockTimestamp, TransactionRecord, WorldTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InjectionMethod {
    /// The sender attaches its own world time to the call.
    Parameter,
    /// The including block's timestamp stands in for world time.
    BlockTimestamp,
}

impl InjectionMethod {
    pub fn name(self) -> &'static str {
        match self {
            InjectionMethod::Parameter => "parameter",
            InjectionMethod::BlockTimestamp => "block-timestamp",
        }
    }
}

impl fmt::Display for InjectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InjectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parameter" => Ok(InjectionMethod::Parameter),
            "block-timestamp" => Ok(InjectionMethod::BlockTimestamp),
            other => Err(Error::validation(format!(
                "unknown injection method `{other}` (expected `parameter` or `block-timestamp`)"
            ))),
        }
    }
}

/// How the block producer stamps a new block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimestampPolicy {
    /// Floor of the production wall-clock time.
    WallClockFloor,
    /// Parent timestamp plus the configured blocktime, ignoring the wall clock.
    ParentPlusBlocktime,
    /// Floor of the production time shifted by a constant miner skew.
    SkewedWallClock { offset: i64 },
}

impl TimestampPolicy {
    pub fn name(self) -> &'static str {
        match self {
            TimestampPolicy::WallClockFloor => "wall-clock-floor",
            TimestampPolicy::ParentPlusBlocktime => "parent-plus-blocktime",
            TimestampPolicy::SkewedWallClock { .. } => "skewed-wall-clock",
        }
    }

    /// Builds a policy from its config name; `offset` only applies to the skewed policy.
    pub fn from_name(name: &str, offset: i64) -> Result<Self> {
        match name {
            "wall-clock-floor" => Ok(TimestampPolicy::WallClockFloor),
            "parent-plus-blocktime" => Ok(TimestampPolicy::ParentPlusBlocktime),
            "skewed-wall-clock" => Ok(TimestampPolicy::SkewedWallClock { offset }),
            other => Err(Error::validation(format!(
                "unknown timestamp policy `{other}` (expected `wall-clock-floor`, \
                 `parent-plus-blocktime` or `skewed-wall-clock`)"
            ))),
        }
    }

    pub fn skew_offset(self) -> i64 {
        match self {
            TimestampPolicy::SkewedWallClock { offset } => offset,
            _ => 0,
        }
    }
}

/// Parameter injection: the carried world time is the injected time.
pub fn inject_parameter(sent_at: WorldTime) -> f64 {
    sent_at.seconds()
}

/// Timestamp for a block produced at `production_time` on top of `parent`.
///
/// The result is always strictly greater than `parent`; any wall-clock value
/// that would not be is bumped to `parent + 1`.
pub fn assign_block_timestamp(
    policy: TimestampPolicy,
    parent: BlockTimestamp,
    production_time: WorldTime,
    blocktime: u64,
) -> BlockTimestamp {
    let floor = production_time.seconds().floor() as i64;
    let candidate = match policy {
        TimestampPolicy::WallClockFloor => floor,
        TimestampPolicy::ParentPlusBlocktime => {
            return BlockTimestamp(parent.0 + blocktime.max(1));
        }
        TimestampPolicy::SkewedWallClock { offset } => floor.saturating_add(offset),
    };
    if candidate <= parent.0 as i64 {
        BlockTimestamp(parent.0 + 1)
    } else {
        BlockTimestamp(candidate as u64)
    }
}

/// Time the contract sees for `record` under `method`.
pub fn injected_time_of(
    record: &TransactionRecord,
    method: InjectionMethod,
    param_value: Option<f64>,
) -> Result<f64> {
    match method {
        InjectionMethod::Parameter => param_value.ok_or(Error::MissingParameter),
        InjectionMethod::BlockTimestamp => Ok(record.block_timestamp.as_f64()),
    }
}
