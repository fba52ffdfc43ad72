use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Linear regressor trained by per-sample SGD with inverse-scaling step size
/// `eta0 / t^power_t` and an L2 penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgdLinear<F> {
    pub coef: Vec<F>,
    pub intercept: F,
    /// Number of updates performed so far (drives the step-size schedule).
    pub updates: u64,
    pub eta0: F,
    pub power_t: F,
    pub l2: F,
}

pub const SGD_EPOCHS: usize = 10;

impl<F: Real> SgdLinear<F> {
    pub fn new(n_in: usize) -> Self {
        SgdLinear {
            coef: vec![F::zero(); n_in],
            intercept: F::zero(),
            updates: 0,
            eta0: F::lit(0.01),
            power_t: F::lit(0.25),
            l2: F::lit(0.0001),
        }
    }

    pub fn with_coefficients(coef: Vec<F>, intercept: F) -> Self {
        SgdLinear {
            intercept,
            ..SgdLinear::new(coef.len())
        }
        .with_coef(coef)
    }

    fn with_coef(mut self, coef: Vec<F>) -> Self {
        self.coef = coef;
        self
    }

    pub fn predict(&self, x: &[F]) -> F {
        self.coef
            .iter()
            .zip(x)
            .fold(self.intercept, |acc, (&w, &v)| acc + w * v)
    }

    /// One SGD update on a single sample.
    pub fn partial_fit(&mut self, x: &[F], y: F) -> Result<()> {
        if x.len() != self.coef.len() {
            return Err(Error::Arity {
                expected: self.coef.len(),
                got: x.len(),
            });
        }
        self.updates += 1;
        let t = F::from_u64(self.updates).unwrap_or_else(F::max_value);
        let eta = self.eta0 / t.powf(self.power_t);
        let err = self.predict(x) - y;
        let shrink = F::one() - eta * self.l2;
        for (w, &v) in self.coef.iter_mut().zip(x) {
            *w = *w * shrink - eta * err * v;
        }
        self.intercept -= eta * err;
        if !self.intercept.is_finite() || self.coef.iter().any(|w| !w.is_finite()) {
            return Err(Error::FitFailed("SGD diverged".into()));
        }
        Ok(())
    }

    pub fn fit<R: Rng + ?Sized>(
        &mut self,
        x: &[Vec<F>],
        y: &[F],
        epochs: usize,
        rng: &mut R,
    ) -> Result<()> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::EmptySample);
        }
        let mut order: Vec<usize> = (0..x.len()).collect();
        for _ in 0..epochs {
            order.shuffle(rng);
            for &i in &order {
                self.partial_fit(&x[i], y[i])?;
            }
        }
        Ok(())
    }
}
