//! One-hidden-layer perceptron used both as a random mapper and as a learned mapper.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lerp, Real};

pub const HIDDEN_UNITS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply<F: Real>(self, x: F) -> F {
        match self {
            Activation::Relu => x.max(F::zero()),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation and activation values.
    #[inline]
    fn derivative<F: Real>(self, pre: F, act: F) -> F {
        match self {
            Activation::Relu => {
                if pre > F::zero() {
                    F::one()
                } else {
                    F::zero()
                }
            }
            Activation::Tanh => F::one() - act * act,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mlp<F> {
    /// `hidden x inputs`
    pub hidden_weights: Vec<Vec<F>>,
    pub hidden_bias: Vec<F>,
    pub output_weights: Vec<F>,
    pub output_bias: F,
    pub activation: Activation,
}

/// Optimizer settings for [`Mlp::fit_adam`].
#[derive(Debug, Clone, Copy)]
pub struct AdamConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub l2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            epochs: 10,
            learning_rate: 0.001,
            batch_size: 200,
            l2: 0.0001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

pub fn glorot_bound<F: Real>(fan_in: usize, fan_out: usize) -> F {
    (F::lit(6.0) / F::from_count(fan_in + fan_out)).sqrt()
}

impl<F: Real> Mlp<F> {
    /// Glorot-uniform initialization of every weight and bias.
    pub fn xavier<R: Rng + ?Sized>(
        n_in: usize,
        hidden: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if n_in == 0 || hidden == 0 {
            return Err(Error::param("an MLP needs at least one input and one hidden unit"));
        }
        let b1: F = glorot_bound(n_in, hidden);
        let b2: F = glorot_bound(hidden, 1);
        let mut draw = |b: F| F::uniform(rng, -b, b);
        let hidden_weights = (0..hidden)
            .map(|_| (0..n_in).map(|_| draw(b1)).collect())
            .collect();
        let hidden_bias = (0..hidden).map(|_| draw(b1)).collect();
        let output_weights = (0..hidden).map(|_| draw(b2)).collect();
        let output_bias = draw(b2);
        Ok(Mlp {
            hidden_weights,
            hidden_bias,
            output_weights,
            output_bias,
            activation,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.hidden_weights.first().map_or(0, Vec::len)
    }

    pub fn forward(&self, x: &[F]) -> F {
        self.hidden_weights
            .iter()
            .zip(&self.hidden_bias)
            .zip(&self.output_weights)
            .fold(self.output_bias, |acc, ((w, &b), &v)| {
                let pre = w.iter().zip(x).fold(b, |s, (&wi, &xi)| s + wi * xi);
                acc + v * self.activation.apply(pre)
            })
    }

    /// Minibatch Adam on half mean squared error with an L2 penalty on weights.
    /// Returns the mean squared error of the final epoch.
    pub fn fit_adam<R: Rng + ?Sized>(
        &mut self,
        x: &[Vec<F>],
        y: &[F],
        cfg: &AdamConfig,
        rng: &mut R,
    ) -> Result<F> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::EmptySample);
        }
        let n_in = self.n_inputs();
        let hidden = self.hidden_bias.len();
        let (beta1, beta2, eps) = (F::lit(cfg.beta1), F::lit(cfg.beta2), F::lit(cfg.epsilon));
        let lr = F::lit(cfg.learning_rate);
        let l2 = F::lit(cfg.l2);

        // parameters flattened as [W (hidden*n_in), b (hidden), v (hidden), c]
        let n_params = hidden * n_in + 2 * hidden + 1;
        let mut m = vec![F::zero(); n_params];
        let mut s = vec![F::zero(); n_params];
        let mut grad = vec![F::zero(); n_params];
        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut step = 0i32;
        let mut pre = vec![F::zero(); hidden];
        let mut act = vec![F::zero(); hidden];
        let mut last_mse = F::zero();

        for _ in 0..cfg.epochs {
            order.shuffle(rng);
            let mut sq_sum = F::zero();
            for batch in order.chunks(cfg.batch_size.max(1)) {
                grad.iter_mut().for_each(|g| *g = F::zero());
                for &i in batch {
                    let xi = &x[i];
                    let mut out = self.output_bias;
                    for j in 0..hidden {
                        let p = self.hidden_weights[j]
                            .iter()
                            .zip(xi)
                            .fold(self.hidden_bias[j], |a, (&w, &v)| a + w * v);
                        pre[j] = p;
                        act[j] = self.activation.apply(p);
                        out += self.output_weights[j] * act[j];
                    }
                    let err = out - y[i];
                    sq_sum += err * err;
                    let v_off = hidden * n_in + hidden;
                    for j in 0..hidden {
                        grad[v_off + j] += err * act[j];
                        let delta =
                            err * self.output_weights[j] * self.activation.derivative(pre[j], act[j]);
                        grad[hidden * n_in + j] += delta;
                        for k in 0..n_in {
                            grad[j * n_in + k] += delta * xi[k];
                        }
                    }
                    grad[n_params - 1] += err;
                }
                let nb = F::from_count(batch.len());
                for g in grad.iter_mut() {
                    *g /= nb;
                }
                // L2 on weights only
                for j in 0..hidden {
                    for k in 0..n_in {
                        grad[j * n_in + k] += l2 * self.hidden_weights[j][k] / nb;
                    }
                    grad[hidden * n_in + hidden + j] += l2 * self.output_weights[j] / nb;
                }

                step += 1;
                let lr_t = lr * (F::one() - beta2.powi(step)).sqrt() / (F::one() - beta1.powi(step));
                let mut update = |idx: usize, p: &mut F| {
                    m[idx] = beta1 * m[idx] + (F::one() - beta1) * grad[idx];
                    s[idx] = beta2 * s[idx] + (F::one() - beta2) * grad[idx] * grad[idx];
                    *p -= lr_t * m[idx] / (s[idx].sqrt() + eps);
                };
                for j in 0..hidden {
                    for k in 0..n_in {
                        update(j * n_in + k, &mut self.hidden_weights[j][k]);
                    }
                }
                for j in 0..hidden {
                    update(hidden * n_in + j, &mut self.hidden_bias[j]);
                }
                for j in 0..hidden {
                    update(hidden * n_in + hidden + j, &mut self.output_weights[j]);
                }
                update(n_params - 1, &mut self.output_bias);
            }
            last_mse = sq_sum / F::from_count(x.len());
            if !last_mse.is_finite() {
                return Err(Error::FitFailed("MLP loss diverged".into()));
            }
        }
        Ok(last_mse)
    }

    /// Weight-wise interpolation between two networks of identical shape.
    pub fn interpolate(&self, end: &Self, fraction: F) -> Result<Self> {
        if self.n_inputs() != end.n_inputs() || self.hidden_bias.len() != end.hidden_bias.len() {
            return Err(Error::param("cannot interpolate MLPs of different shape"));
        }
        let mix = |a: &[F], b: &[F]| -> Vec<F> {
            a.iter().zip(b).map(|(&p, &q)| lerp(p, q, fraction)).collect()
        };
        Ok(Mlp {
            hidden_weights: self
                .hidden_weights
                .iter()
                .zip(&end.hidden_weights)
                .map(|(a, b)| mix(a, b))
                .collect(),
            hidden_bias: mix(&self.hidden_bias, &end.hidden_bias),
            output_weights: mix(&self.output_weights, &end.output_weights),
            output_bias: lerp(self.output_bias, end.output_bias, fraction),
            activation: end.activation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn glorot_bound_for_five_inputs() {
        let b: f64 = glorot_bound(5, 10);
        assert!((b - (6.0f64 / 15.0).sqrt()).abs() < 1e-15);
        assert!((b - 0.6325).abs() < 1e-4);
    }

    #[test]
    fn adam_reduces_error_on_smooth_target() {
        let mut rng = seeded(11);
        let x: Vec<Vec<f64>> = (0..512)
            .map(|i| vec![-2.0 + 4.0 * i as f64 / 511.0])
            .collect();
        let y: Vec<f64> = x.iter().map(|r| r[0].sin()).collect();
        let mut net = Mlp::xavier(1, HIDDEN_UNITS, Activation::Relu, &mut rng).unwrap();
        let before = x
            .iter()
            .zip(&y)
            .map(|(r, t)| (net.forward(r) - t).powi(2))
            .sum::<f64>();
        let cfg = AdamConfig {
            epochs: 200,
            learning_rate: 0.01,
            ..AdamConfig::default()
        };
        net.fit_adam(&x, &y, &cfg, &mut rng).unwrap();
        let after = x
            .iter()
            .zip(&y)
            .map(|(r, t)| (net.forward(r) - t).powi(2))
            .sum::<f64>();
        assert!(after < 0.2 * before, "before {before}, after {after}");
    }

    #[test]
    fn interpolation_endpoint_is_exact() {
        let mut rng = seeded(1);
        let a = Mlp::<f64>::xavier(3, 10, Activation::Tanh, &mut rng).unwrap();
        let b = Mlp::<f64>::xavier(3, 10, Activation::Tanh, &mut rng).unwrap();
        assert_eq!(a.interpolate(&b, 1.0).unwrap(), b);
        assert_eq!(a.interpolate(&b, 0.0).unwrap(), a);
    }
}
