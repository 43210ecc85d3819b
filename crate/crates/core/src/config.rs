//! Experiment config files.
//!
//! A config is a TOML document using dotted keys:
//!
//! ```toml
//! interval.a = 15
//! interval.b = 30
//! window.start = 0
//! window.end = 45
//! blocktime_s = 4
//! recommit_interval_s = 0
//! latency.kind = "pareto"
//! latency.params = [1.0, 1.5]
//! policy = "wall-clock-floor"
//! skew_offset_s = 0
//! method = "block-timestamp"
//! tx_rate = 1
//! rounds = 30
//! master_seed = 7
//! label = "local-b4"
//! ```
//!
//! Keys that are absent keep the value of the base config (a preset). Every
//! error carries the 1-based line of the offending key.

use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use crate::error::{Error, Result};
use crate::experiment::ExperimentConfig;
use crate::injection::{InjectionMethod, TimestampPolicy};
use crate::latency::LatencyModel;
use crate::model::{ConstraintInterval, Window};

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    fn as_f64(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Float(f) => f,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInterval {
    a: Option<Spanned<u64>>,
    b: Option<Spanned<u64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWindow {
    start: Option<Spanned<Number>>,
    end: Option<Spanned<Number>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLatency {
    kind: Option<Spanned<String>>,
    params: Option<Spanned<Vec<Number>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    interval: RawInterval,
    #[serde(default)]
    window: RawWindow,
    blocktime_s: Option<Spanned<u64>>,
    recommit_interval_s: Option<Spanned<Number>>,
    #[serde(default)]
    latency: RawLatency,
    policy: Option<Spanned<String>>,
    skew_offset_s: Option<Spanned<i64>>,
    method: Option<Spanned<String>>,
    tx_rate: Option<Spanned<Number>>,
    rounds: Option<Spanned<u32>>,
    master_seed: Option<Spanned<u64>>,
    label: Option<Spanned<String>>,
}

struct Anchor<'a> {
    path: &'a str,
    source: &'a str,
}

impl Anchor<'_> {
    fn line_of(&self, offset: usize) -> usize {
        let end = offset.min(self.source.len());
        self.source[..end].bytes().filter(|b| *b == b'\n').count() + 1
    }

    fn error(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Config {
            path: self.path.to_string(),
            line: self.line_of(offset),
            message: message.into(),
        }
    }

    /// Re-anchors a validation failure at `offset`.
    fn at<T>(&self, offset: usize, result: Result<T>) -> Result<T> {
        result.map_err(|e| match e {
            Error::Validation(msg) => self.error(offset, msg),
            other => other,
        })
    }
}

fn start_of<T>(s: &Option<Spanned<T>>) -> Option<usize> {
    s.as_ref().map(|s| s.span().start)
}

/// Parses `source` on top of `base`. `path` is only used in error messages.
pub fn parse_config(source: &str, path: &str, base: &ExperimentConfig) -> Result<ExperimentConfig> {
    let anchor = Anchor { path, source };
    let raw: RawConfig = toml::from_str(source).map_err(|e| {
        let offset = e.span().map(|s| s.start).unwrap_or(0);
        anchor.error(offset, e.message().trim().to_string())
    })?;

    let mut cfg = base.clone();
    let sim = &mut cfg.sim;

    // interval
    let a = raw
        .interval
        .a
        .as_ref()
        .map(|s| *s.get_ref())
        .unwrap_or(sim.interval.lower());
    let b = raw
        .interval
        .b
        .as_ref()
        .map(|s| *s.get_ref())
        .unwrap_or(sim.interval.upper());
    let interval_line = start_of(&raw.interval.b)
        .or(start_of(&raw.interval.a))
        .unwrap_or(0);
    sim.interval = anchor.at(interval_line, ConstraintInterval::new(a, b))?;

    // window
    let start = raw
        .window
        .start
        .as_ref()
        .map(|s| s.get_ref().as_f64())
        .unwrap_or(sim.window.start);
    let end = raw
        .window
        .end
        .as_ref()
        .map(|s| s.get_ref().as_f64())
        .unwrap_or(sim.window.end);
    let window_line = start_of(&raw.window.end)
        .or(start_of(&raw.window.start))
        .unwrap_or(0);
    sim.window = anchor.at(window_line, Window::new(start, end))?;
    if !sim.window.covers(&sim.interval) {
        let offset = start_of(&raw.window.start)
            .or(start_of(&raw.window.end))
            .or(start_of(&raw.interval.a))
            .unwrap_or(0);
        return Err(anchor.error(
            offset,
            format!(
                "experiment window [{start}, {end}] does not contain constraint interval {}",
                sim.interval
            ),
        ));
    }

    if let Some(bt) = &raw.blocktime_s {
        if *bt.get_ref() < 1 {
            return Err(anchor.error(bt.span().start, "blocktime_s must be at least 1"));
        }
        sim.blocktime = *bt.get_ref();
    }

    if let Some(r) = &raw.recommit_interval_s {
        let value = r.get_ref().as_f64();
        if !(value.is_finite() && value >= 0.0) {
            return Err(anchor.error(
                r.span().start,
                "recommit_interval_s must be finite and non-negative",
            ));
        }
        sim.recommit_interval = value;
    }

    if raw.latency.kind.is_some() || raw.latency.params.is_some() {
        let kind = raw.latency.kind.as_ref().map(|k| k.get_ref().clone());
        let kind = kind.unwrap_or_else(|| sim.latency.kind().to_string());
        let params: Vec<f64> = match &raw.latency.params {
            Some(p) => p.get_ref().iter().map(|n| n.as_f64()).collect(),
            None => {
                let offset = start_of(&raw.latency.kind).unwrap_or(0);
                return Err(anchor.error(offset, "latency.kind requires latency.params"));
            }
        };
        let offset = start_of(&raw.latency.params)
            .or(start_of(&raw.latency.kind))
            .unwrap_or(0);
        sim.latency = anchor.at(offset, LatencyModel::from_parts(&kind, &params))?;
    }

    let offset_value = raw.skew_offset_s.as_ref().map(|s| *s.get_ref());
    match &raw.policy {
        Some(p) => {
            let skew = offset_value.unwrap_or(sim.policy.skew_offset());
            sim.policy = anchor.at(
                p.span().start,
                TimestampPolicy::from_name(p.get_ref(), skew),
            )?;
        }
        None => {
            if let (Some(skew), TimestampPolicy::SkewedWallClock { .. }) =
                (offset_value, sim.policy)
            {
                sim.policy = TimestampPolicy::SkewedWallClock { offset: skew };
            }
        }
    }

    if let Some(m) = &raw.method {
        sim.method = anchor.at(m.span().start, m.get_ref().parse::<InjectionMethod>())?;
    }

    if let Some(rate) = &raw.tx_rate {
        let value = rate.get_ref().as_f64();
        if !(value.is_finite() && value > 0.0) {
            return Err(anchor.error(rate.span().start, "tx_rate must be positive"));
        }
        sim.tx_rate = value;
    }

    if let Some(rounds) = &raw.rounds {
        if *rounds.get_ref() < 1 {
            return Err(anchor.error(rounds.span().start, "rounds must be at least 1"));
        }
        cfg.rounds = *rounds.get_ref();
    }
    if let Some(seed) = &raw.master_seed {
        cfg.master_seed = *seed.get_ref();
    }
    if let Some(label) = &raw.label {
        cfg.label = label.get_ref().clone();
    }

    anchor.at(0, cfg.validate())?;
    Ok(cfg)
}

pub fn load_config(path: &Path, base: &ExperimentConfig) -> Result<ExperimentConfig> {
    let source = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&source, &path.display().to_string(), base)
}

/// Writes `config` in the config-file format; `parse_config` reads it back unchanged.
pub fn render_config(config: &ExperimentConfig) -> String {
    let sim = &config.sim;
    let params: Vec<String> = sim
        .latency
        .params()
        .iter()
        .map(|p| format!("{p:?}"))
        .collect();
    format!(
        "interval.a = {}\n\
         interval.b = {}\n\
         window.start = {:?}\n\
         window.end = {:?}\n\
         blocktime_s = {}\n\
         recommit_interval_s = {:?}\n\
         latency.kind = {:?}\n\
         latency.params = [{}]\n\
         policy = {:?}\n\
         skew_offset_s = {}\n\
         method = {:?}\n\
         tx_rate = {:?}\n\
         rounds = {}\n\
         master_seed = {}\n\
         label = {}\n",
        sim.interval.lower(),
        sim.interval.upper(),
        sim.window.start,
        sim.window.end,
        sim.blocktime,
        sim.recommit_interval,
        sim.latency.kind(),
        params.join(", "),
        sim.policy.name(),
        sim.policy.skew_offset(),
        sim.method.name(),
        sim.tx_rate,
        config.rounds,
        config.master_seed,
        toml::Value::String(config.label.clone()),
    )
}
