//! Network delay between a sender and the block-producing node.

use rand::Rng;
use rand_distr::{Distribution, Exp, Pareto, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LatencyModel {
    Constant {
        delay: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    Exponential {
        mean: f64,
    },
    /// Heavy-tailed delays; samples are always at least `scale`.
    Pareto {
        scale: f64,
        shape: f64,
    },
}

impl LatencyModel {
    pub const ZERO: LatencyModel = LatencyModel::Constant { delay: 0.0 };

    pub fn kind(&self) -> &'static str {
        match self {
            LatencyModel::Constant { .. } => "constant",
            LatencyModel::Uniform { .. } => "uniform",
            LatencyModel::Exponential { .. } => "exponential",
            LatencyModel::Pareto { .. } => "pareto",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            LatencyModel::Constant { delay } => vec![delay],
            LatencyModel::Uniform { lo, hi } => vec![lo, hi],
            LatencyModel::Exponential { mean } => vec![mean],
            LatencyModel::Pareto { scale, shape } => vec![scale, shape],
        }
    }

    /// Builds and validates a model from its config kind and parameter list.
    pub fn from_parts(kind: &str, params: &[f64]) -> Result<Self> {
        let expect = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::validation(format!(
                    "latency kind `{kind}` takes {n} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        let model = match kind {
            "constant" => {
                expect(1)?;
                LatencyModel::Constant { delay: params[0] }
            }
            "uniform" => {
                expect(2)?;
                LatencyModel::Uniform { lo: params[0], hi: params[1] }
            }
            "exponential" => {
                expect(1)?;
                LatencyModel::Exponential { mean: params[0] }
            }
            "pareto" => {
                expect(2)?;
                LatencyModel::Pareto { scale: params[0], shape: params[1] }
            }
            other => {
                return Err(Error::validation(format!(
                    "unknown latency kind `{other}` (expected constant, uniform, exponential or pareto)"
                )))
            }
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.params().iter().all(|p| p.is_finite());
        let ok = finite
            && match *self {
                LatencyModel::Constant { delay } => delay >= 0.0,
                LatencyModel::Uniform { lo, hi } => lo >= 0.0 && lo <= hi,
                LatencyModel::Exponential { mean } => mean > 0.0,
                LatencyModel::Pareto { scale, shape } => scale > 0.0 && shape > 1.0,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::validation(format!(
                "invalid {} latency parameters {:?}",
                self.kind(),
                self.params()
            )))
        }
    }

    /// Worst-case delay, or `None` for unbounded models.
    pub fn max_delay(&self) -> Option<f64> {
        match *self {
            LatencyModel::Constant { delay } => Some(delay),
            LatencyModel::Uniform { hi, .. } => Some(hi),
            _ => None,
        }
    }

    pub fn sampler(&self) -> Result<LatencySampler> {
        self.validate()?;
        let inner = match *self {
            LatencyModel::Constant { delay } => Sampler::Constant(delay),
            LatencyModel::Uniform { lo, hi } => Sampler::Uniform(
                Uniform::new_inclusive(lo, hi).map_err(|e| Error::validation(e.to_string()))?,
            ),
            LatencyModel::Exponential { mean } => {
                Sampler::Exp(Exp::new(1.0 / mean).map_err(|e| Error::validation(e.to_string()))?)
            }
            LatencyModel::Pareto { scale, shape } => Sampler::Pareto(
                Pareto::new(scale, shape).map_err(|e| Error::validation(e.to_string()))?,
            ),
        };
        Ok(LatencySampler { inner })
    }
}

#[derive(Debug, Clone)]
enum Sampler {
    Constant(f64),
    Uniform(Uniform<f64>),
    Exp(Exp<f64>),
    Pareto(Pareto<f64>),
}

/// A validated model ready to draw delays.
#[derive(Debug, Clone)]
pub struct LatencySampler {
    inner: Sampler,
}

impl LatencySampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.inner {
            Sampler::Constant(d) => *d,
            Sampler::Uniform(u) => u.sample(rng),
            Sampler::Exp(e) => e.sample(rng),
            Sampler::Pareto(p) => p.sample(rng),
        }
    }
}
