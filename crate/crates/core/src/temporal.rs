//! Per-node time dependence: exponential smoothing of root draws and AR(1) noise.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mappers::RootDistribution;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemporalParams<F> {
    pub alpha: F,
    pub rho: F,
    /// Innovation standard deviation, in units of each node's scale.
    pub sigma: F,
}

impl<F: Real> Default for TemporalParams<F> {
    fn default() -> Self {
        TemporalParams {
            alpha: F::lit(0.05),
            rho: F::lit(0.5),
            sigma: F::lit(0.1),
        }
    }
}

impl<F: Real> TemporalParams<F> {
    pub fn new(alpha: F, rho: F, sigma: F) -> Result<Self> {
        let p = TemporalParams { alpha, rho, sigma };
        p.validate()?;
        Ok(p)
    }

    /// No smoothing and no noise memory.
    pub fn iid(sigma: F) -> Self {
        TemporalParams {
            alpha: F::one(),
            rho: F::zero(),
            sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: F| v >= F::zero() && v <= F::one();
        if !unit(self.alpha) {
            return Err(Error::param(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !unit(self.rho) {
            return Err(Error::param(format!("rho must lie in [0, 1], got {}", self.rho)));
        }
        if !(self.sigma >= F::zero()) || !self.sigma.is_finite() {
            return Err(Error::param(format!("sigma must be non-negative, got {}", self.sigma)));
        }
        Ok(())
    }
}

pub fn ewma_step<F: Real>(z_prev: F, x: F, alpha: F) -> Result<F> {
    if !(alpha >= F::zero() && alpha <= F::one()) {
        return Err(Error::param(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if !z_prev.is_finite() || !x.is_finite() {
        return Err(Error::NonFinite("smoothing input".into()));
    }
    Ok(if alpha == F::one() {
        x
    } else if alpha == F::zero() {
        z_prev
    } else {
        (F::one() - alpha) * z_prev + alpha * x
    })
}

/// `rho * n_prev + eps` with `eps ~ N(0, (sigma * scale)^2)`.
pub fn ar_noise_step<F: Real, R: Rng + ?Sized>(
    n_prev: F,
    p: &TemporalParams<F>,
    scale: F,
    rng: &mut R,
) -> F {
    p.rho * n_prev + p.sigma * scale * F::standard_normal(rng)
}

/// `(1 - alpha) * x_prev + alpha * theta + noise`.
#[inline]
pub fn root_update<F: Real>(x_prev: F, theta: F, alpha: F, noise: F) -> F {
    (F::one() - alpha) * x_prev + alpha * theta + noise
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeTemporal<F> {
    /// Last value produced by the node's own dynamics (ignores interventions).
    pub value: F,
    pub noise: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemporalState<F> {
    pub nodes: Vec<NodeTemporal<F>>,
}

impl<F: Real> TemporalState<F> {
    /// Starts every node at `centers[i]` with zero noise.
    pub fn new(centers: &[F]) -> Self {
        TemporalState {
            nodes: centers
                .iter()
                .map(|&value| NodeTemporal {
                    value,
                    noise: F::zero(),
                })
                .collect(),
        }
    }
}

/// Advances a root node: draws `theta` from `dist`, then the AR innovation.
pub fn root_value_step<F: Real, R: Rng + ?Sized>(
    entry: &mut NodeTemporal<F>,
    dist: &RootDistribution<F>,
    p: &TemporalParams<F>,
    scale: F,
    rng: &mut R,
) -> F {
    let theta = dist.sample(rng);
    entry.noise = ar_noise_step(entry.noise, p, scale, rng);
    entry.value = root_update(entry.value, theta, p.alpha, entry.noise);
    entry.value
}
