use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lerp, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RootDistribution<F> {
    Normal { mean: F, variance: F },
    Uniform { low: F, high: F },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootKind {
    Normal,
    Uniform,
}

/// Draw ranges for randomly initialized root distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RootRanges<F> {
    pub mean: (F, F),
    pub variance: (F, F),
    pub low: (F, F),
    pub width: (F, F),
}

impl<F: Real> Default for RootRanges<F> {
    fn default() -> Self {
        RootRanges {
            mean: (F::lit(-5.0), F::lit(5.0)),
            variance: (F::lit(0.25), F::lit(4.0)),
            low: (F::lit(-5.0), F::zero()),
            width: (F::one(), F::lit(10.0)),
        }
    }
}

impl<F: Real> RootDistribution<F> {
    pub fn normal(mean: F, variance: F) -> Result<Self> {
        let d = RootDistribution::Normal { mean, variance };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(low: F, high: F) -> Result<Self> {
        let d = RootDistribution::Uniform { low, high };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RootDistribution::Normal { mean, variance } => {
                if !mean.is_finite() || !variance.is_finite() || variance <= F::zero() {
                    return Err(Error::param(format!(
                        "normal root needs finite mean and positive variance, got ({mean}, {variance})"
                    )));
                }
            }
            RootDistribution::Uniform { low, high } => {
                if !low.is_finite() || !high.is_finite() || low >= high {
                    return Err(Error::param(format!(
                        "uniform root needs low < high, got ({low}, {high})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn random<R: Rng + ?Sized>(kind: RootKind, ranges: &RootRanges<F>, rng: &mut R) -> Self {
        match kind {
            RootKind::Normal => RootDistribution::Normal {
                mean: F::uniform(rng, ranges.mean.0, ranges.mean.1),
                variance: F::uniform(rng, ranges.variance.0, ranges.variance.1),
            },
            RootKind::Uniform => {
                let low = F::uniform(rng, ranges.low.0, ranges.low.1);
                let width = F::uniform(rng, ranges.width.0, ranges.width.1);
                RootDistribution::Uniform {
                    low,
                    high: low + width,
                }
            }
        }
    }

    pub fn kind(&self) -> RootKind {
        match self {
            RootDistribution::Normal { .. } => RootKind::Normal,
            RootDistribution::Uniform { .. } => RootKind::Uniform,
        }
    }

    /// Mean for normals, midpoint for uniforms.
    pub fn center(&self) -> F {
        match *self {
            RootDistribution::Normal { mean, .. } => mean,
            RootDistribution::Uniform { low, high } => (low + high) / F::lit(2.0),
        }
    }

    pub fn std_dev(&self) -> F {
        match *self {
            RootDistribution::Normal { variance, .. } => variance.sqrt(),
            RootDistribution::Uniform { low, high } => (high - low) / F::lit(12.0).sqrt(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> F {
        match *self {
            RootDistribution::Normal { mean, variance } => {
                mean + variance.sqrt() * F::standard_normal(rng)
            }
            RootDistribution::Uniform { low, high } => F::uniform(rng, low, high),
        }
    }

    /// Moves the location by `scales` standard deviations, keeping the spread.
    pub fn shift_mean(&self, scales: F) -> Self {
        let delta = scales * self.std_dev();
        match *self {
            RootDistribution::Normal { mean, variance } => RootDistribution::Normal {
                mean: mean + delta,
                variance,
            },
            RootDistribution::Uniform { low, high } => RootDistribution::Uniform {
                low: low + delta,
                high: high + delta,
            },
        }
    }

    /// Parameter-wise interpolation between two distributions of the same kind.
    pub fn interpolate(&self, end: &Self, fraction: F) -> Result<Self> {
        match (self, end) {
            (
                RootDistribution::Normal { mean: m0, variance: v0 },
                RootDistribution::Normal { mean: m1, variance: v1 },
            ) => Ok(RootDistribution::Normal {
                mean: lerp(*m0, *m1, fraction),
                variance: lerp(*v0, *v1, fraction),
            }),
            (
                RootDistribution::Uniform { low: a0, high: b0 },
                RootDistribution::Uniform { low: a1, high: b1 },
            ) => Ok(RootDistribution::Uniform {
                low: lerp(*a0, *a1, fraction),
                high: lerp(*b0, *b1, fraction),
            }),
            _ => Err(Error::param(
                "cannot interpolate between normal and uniform root distributions",
            )),
        }
    }
}
