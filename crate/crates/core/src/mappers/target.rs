//! Analytic target functions that learned mappers are fitted to.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    Linear,
    Sine,
    Step,
    Checkerboard,
    Rbf,
}

impl TargetKind {
    pub const ALL: [TargetKind; 5] = [
        TargetKind::Linear,
        TargetKind::Sine,
        TargetKind::Step,
        TargetKind::Checkerboard,
        TargetKind::Rbf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TargetKind::Linear => "linear",
            TargetKind::Sine => "sine",
            TargetKind::Step => "step",
            TargetKind::Checkerboard => "checkerboard",
            TargetKind::Rbf => "rbf",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetShape<F> {
    Linear { weights: Vec<F>, bias: F },
    Sine,
    Step,
    Checkerboard,
    Rbf { width: F },
}

/// A target function over `arity` inputs.
///
/// `noise_scale` is the amplitude of the additive noise relative to the function's
/// output spread on the fit sample; the caller draws the actual noise value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFunction<F> {
    pub arity: usize,
    pub shape: TargetShape<F>,
    pub noise_scale: F,
}

pub const DEFAULT_NOISE_SCALE: f64 = 0.05;

impl<F: Real> TargetFunction<F> {
    pub fn new(arity: usize, shape: TargetShape<F>, noise_scale: F) -> Result<Self> {
        let f = TargetFunction {
            arity,
            shape,
            noise_scale,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arity == 0 {
            return Err(Error::param("target function needs at least one input"));
        }
        if !(self.noise_scale >= F::zero()) {
            return Err(Error::param("noise scale must be non-negative"));
        }
        match &self.shape {
            TargetShape::Linear { weights, .. } if weights.len() != self.arity => {
                Err(Error::Arity {
                    expected: self.arity,
                    got: weights.len(),
                })
            }
            TargetShape::Rbf { width } if !(*width > F::zero()) => {
                Err(Error::param("rbf width must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Draws parameters for `kind`: linear weights and bias in `[-1, 1]`, rbf width in `[0.5, 2]`.
    pub fn random<R: Rng + ?Sized>(
        kind: TargetKind,
        arity: usize,
        noise_scale: F,
        rng: &mut R,
    ) -> Result<Self> {
        let shape = match kind {
            TargetKind::Linear => TargetShape::Linear {
                weights: (0..arity)
                    .map(|_| F::uniform(rng, -F::one(), F::one()))
                    .collect(),
                bias: F::uniform(rng, -F::one(), F::one()),
            },
            TargetKind::Sine => TargetShape::Sine,
            TargetKind::Step => TargetShape::Step,
            TargetKind::Checkerboard => TargetShape::Checkerboard,
            TargetKind::Rbf => TargetShape::Rbf {
                width: F::uniform(rng, F::lit(0.5), F::lit(2.0)),
            },
        };
        TargetFunction::new(arity, shape, noise_scale)
    }

    pub fn kind(&self) -> TargetKind {
        match self.shape {
            TargetShape::Linear { .. } => TargetKind::Linear,
            TargetShape::Sine => TargetKind::Sine,
            TargetShape::Step => TargetKind::Step,
            TargetShape::Checkerboard => TargetKind::Checkerboard,
            TargetShape::Rbf { .. } => TargetKind::Rbf,
        }
    }

    /// Whether the function carries additive noise at all (checkerboard does not).
    pub fn is_noisy(&self) -> bool {
        !matches!(self.shape, TargetShape::Checkerboard)
    }

    /// Evaluates the function and adds `noise`. Checkerboard ignores `noise`.
    pub fn eval(&self, x: &[F], noise: F) -> Result<F> {
        if x.len() != self.arity {
            return Err(Error::Arity {
                expected: self.arity,
                got: x.len(),
            });
        }
        let sum = || x.iter().fold(F::zero(), |acc, &v| acc + v);
        let value = match &self.shape {
            TargetShape::Linear { weights, bias } => {
                weights
                    .iter()
                    .zip(x)
                    .fold(*bias, |acc, (&w, &v)| acc + w * v)
                    + noise
            }
            TargetShape::Sine => x.iter().fold(F::zero(), |acc, &v| acc + v.sin()) + noise,
            TargetShape::Step => {
                if sum() > F::zero() {
                    F::one() + noise
                } else {
                    noise
                }
            }
            TargetShape::Checkerboard => {
                let cells = x.iter().fold(F::zero(), |acc, &v| acc + v.floor());
                let two = F::lit(2.0);
                let r = cells % two;
                if r < F::zero() {
                    r + two
                } else {
                    r
                }
            }
            TargetShape::Rbf { width } => {
                let sq = x.iter().fold(F::zero(), |acc, &v| acc + v * v);
                (-sq / (F::lit(2.0) * *width * *width)).exp() + noise
            }
        };
        Ok(value)
    }
}
