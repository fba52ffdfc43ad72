use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{mean_std, Real};

/// Per-input affine standardization captured at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Standardizer<F> {
    pub mean: Vec<F>,
    pub scale: Vec<F>,
}

impl<F: Real> Standardizer<F> {
    pub fn identity(n: usize) -> Self {
        Standardizer {
            mean: vec![F::zero(); n],
            scale: vec![F::one(); n],
        }
    }

    /// Fits column means and population standard deviations on row-major samples.
    /// Constant columns get a unit scale.
    pub fn fit(rows: &[Vec<F>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptySample)?;
        let n_in = first.len();
        let mut mean = Vec::with_capacity(n_in);
        let mut scale = Vec::with_capacity(n_in);
        for j in 0..n_in {
            let col: Vec<F> = rows.iter().map(|r| r[j]).collect();
            let (m, s) = mean_std(&col);
            mean.push(m);
            scale.push(if s > F::epsilon() { s } else { F::one() });
        }
        Ok(Standardizer { mean, scale })
    }

    pub fn arity(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[F]) -> Vec<F> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }

    pub fn apply_rows(&self, rows: &[Vec<F>]) -> Vec<Vec<F>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_column_gets_unit_scale() {
        let s = Standardizer::fit(&[vec![1.0_f64, 2.0], vec![1.0, 4.0]]).unwrap();
        assert_eq!(s.scale[0], 1.0);
        assert_eq!(s.apply(&[1.0, 3.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(matches!(
            Standardizer::<f64>::fit(&[]),
            Err(Error::EmptySample)
        ));
    }
}
