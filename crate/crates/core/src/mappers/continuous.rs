use rand::Rng;
use serde::{Deserialize, Serialize};

use super::linear::{SgdLinear, SGD_EPOCHS};
use super::mlp::{Activation, AdamConfig, Mlp, HIDDEN_UNITS};
use super::standardize::Standardizer;
use super::target::TargetFunction;
use super::tree::RegressionTree;
use crate::error::{Error, Result};
use crate::scalar::{mean_std, Real};

pub const TREE_DEPTH_RANGE: (usize, usize) = (5, 25);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContinuousKind {
    LearnedMlp,
    RandomMlp,
    RegressionTree,
    SgdLinear,
}

impl ContinuousKind {
    pub const ALL: [ContinuousKind; 4] = [
        ContinuousKind::LearnedMlp,
        ContinuousKind::RandomMlp,
        ContinuousKind::RegressionTree,
        ContinuousKind::SgdLinear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ContinuousKind::LearnedMlp => "learned-mlp",
            ContinuousKind::RandomMlp => "random-mlp",
            ContinuousKind::RegressionTree => "regression-tree",
            ContinuousKind::SgdLinear => "sgd-linear",
        }
    }

    pub fn is_learned(self) -> bool {
        self != ContinuousKind::RandomMlp
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ContinuousModel<F> {
    Mlp(Mlp<F>),
    Tree(RegressionTree<F>),
    Linear(SgdLinear<F>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousMapper<F> {
    pub kind: ContinuousKind,
    pub model: ContinuousModel<F>,
    pub input: Standardizer<F>,
    /// The function a learned mapper was fitted to; `None` for random MLPs.
    pub target_fn: Option<TargetFunction<F>>,
}

fn check_sample<F: Real>(rows: &[Vec<F>], arity: usize) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptySample);
    }
    for r in rows {
        if r.len() != arity {
            return Err(Error::Arity {
                expected: arity,
                got: r.len(),
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parent sample".into()));
        }
    }
    Ok(())
}

/// Evaluates `f` on standardized inputs and adds Gaussian noise whose amplitude is
/// `f.noise_scale` times the spread of the noise-free outputs.
pub fn target_values<F: Real, R: Rng + ?Sized>(
    f: &TargetFunction<F>,
    z: &[Vec<F>],
    rng: &mut R,
) -> Result<Vec<F>> {
    let clean = z
        .iter()
        .map(|r| f.eval(r, F::zero()))
        .collect::<Result<Vec<F>>>()?;
    if !f.is_noisy() || f.noise_scale == F::zero() {
        return Ok(clean);
    }
    let (_, sd) = mean_std(&clean);
    let amp = f.noise_scale * if sd > F::epsilon() { sd } else { F::one() };
    Ok(clean
        .into_iter()
        .map(|v| v + amp * F::standard_normal(rng))
        .collect())
}

/// Trains a learned mapper on `(standardized parents -> f(parents))` pairs.
pub fn fit_continuous_mapper<F: Real, R: Rng + ?Sized>(
    kind: ContinuousKind,
    parent_samples: &[Vec<F>],
    f: &TargetFunction<F>,
    rng: &mut R,
) -> Result<ContinuousMapper<F>> {
    if kind == ContinuousKind::RandomMlp {
        return Err(Error::param("random MLPs are initialized, not fitted"));
    }
    check_sample(parent_samples, f.arity)?;
    let input = Standardizer::fit(parent_samples)?;
    let z = input.apply_rows(parent_samples);
    let y = target_values(f, &z, rng)?;
    let model = match kind {
        ContinuousKind::LearnedMlp => {
            let mut net = Mlp::xavier(f.arity, HIDDEN_UNITS, Activation::Relu, rng)?;
            net.fit_adam(&z, &y, &AdamConfig::default(), rng)?;
            ContinuousModel::Mlp(net)
        }
        ContinuousKind::RegressionTree => {
            let depth = rng.random_range(TREE_DEPTH_RANGE.0..=TREE_DEPTH_RANGE.1);
            ContinuousModel::Tree(RegressionTree::fit(&z, &y, depth)?)
        }
        ContinuousKind::SgdLinear => {
            let mut lin = SgdLinear::new(f.arity);
            lin.fit(&z, &y, SGD_EPOCHS, rng)?;
            ContinuousModel::Linear(lin)
        }
        ContinuousKind::RandomMlp => unreachable!(),
    };
    let mapper = ContinuousMapper {
        kind,
        model,
        input,
        target_fn: Some(f.clone()),
    };
    for r in parent_samples {
        if !mapper.predict(r)?.is_finite() {
            return Err(Error::FitFailed(format!("{} produced a non-finite output", kind.name())));
        }
    }
    Ok(mapper)
}

/// Random tanh network with Glorot-uniform weights and identity input scaling.
pub fn init_random_mlp<F: Real, R: Rng + ?Sized>(
    n_in: usize,
    rng: &mut R,
) -> Result<ContinuousMapper<F>> {
    Ok(ContinuousMapper {
        kind: ContinuousKind::RandomMlp,
        model: ContinuousModel::Mlp(Mlp::xavier(n_in, HIDDEN_UNITS, Activation::Tanh, rng)?),
        input: Standardizer::identity(n_in),
        target_fn: None,
    })
}

impl<F: Real> ContinuousMapper<F> {
    pub fn arity(&self) -> usize {
        self.input.arity()
    }

    /// Deterministic part of the node's value. Noise is added by the caller.
    pub fn predict(&self, parents: &[F]) -> Result<F> {
        if parents.len() != self.arity() {
            return Err(Error::Arity {
                expected: self.arity(),
                got: parents.len(),
            });
        }
        if parents.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mapper input".into()));
        }
        let z = self.input.apply(parents);
        Ok(match &self.model {
            ContinuousModel::Mlp(m) => m.forward(&z),
            ContinuousModel::Tree(t) => t.predict(&z),
            ContinuousModel::Linear(l) => l.predict(&z),
        })
    }

    /// One SGD step toward `y` on a raw parent vector. Only valid for sgd-linear.
    pub fn partial_fit(&mut self, parents: &[F], y: F) -> Result<()> {
        let z = self.input.apply(parents);
        match &mut self.model {
            ContinuousModel::Linear(l) => l.partial_fit(&z, y),
            _ => Err(Error::param("partial fitting needs an sgd-linear mapper")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mappers::target::{TargetKind, TargetShape};
    use crate::rng::seeded;

    fn sample(n: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = seeded(seed);
        (0..n)
            .map(|_| (0..p).map(|_| 3.0 + 2.0 * f64::standard_normal(&mut rng)).collect())
            .collect()
    }

    #[test]
    fn sgd_hand_prediction() {
        let m = ContinuousMapper {
            kind: ContinuousKind::SgdLinear,
            model: ContinuousModel::Linear(SgdLinear::with_coefficients(vec![2.0_f64], 1.0)),
            input: Standardizer::identity(1),
            target_fn: None,
        };
        assert_eq!(m.predict(&[3.0]).unwrap(), 7.0);
        assert!(m.predict(&[f64::NAN]).is_err());
        assert!(m.predict(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn sgd_recovers_noise_free_linear_target() {
        let x = sample(1024, 3, 5);
        let mut rng = seeded(9);
        let f = TargetFunction::random(TargetKind::Linear, 3, 0.0, &mut rng).unwrap();
        let m = fit_continuous_mapper(ContinuousKind::SgdLinear, &x, &f, &mut rng).unwrap();
        let z = m.input.apply_rows(&x);
        let mse = x
            .iter()
            .zip(&z)
            .map(|(r, zr)| (m.predict(r).unwrap() - f.eval(zr, 0.0).unwrap()).powi(2))
            .sum::<f64>()
            / x.len() as f64;
        assert!(mse < 1e-2, "mse {mse}");
    }

    #[test]
    fn tree_separates_step_target() {
        let x = sample(1024, 2, 6);
        let mut rng = seeded(10);
        let f = TargetFunction::new(2, TargetShape::Step, 0.0).unwrap();
        let m = fit_continuous_mapper(ContinuousKind::RegressionTree, &x, &f, &mut rng).unwrap();
        let z = m.input.apply_rows(&x);
        let hits = x
            .iter()
            .zip(&z)
            .filter(|(r, zr)| {
                let pred = m.predict(r).unwrap() > 0.5;
                let truth = zr.iter().sum::<f64>() > 0.0;
                pred == truth
            })
            .count();
        assert!(hits as f64 / 1024.0 >= 0.95);
    }

    #[test]
    fn empty_sample_and_random_kind_rejected() {
        let mut rng = seeded(1);
        let f = TargetFunction::new(1, TargetShape::Sine, 0.0_f64).unwrap();
        assert!(matches!(
            fit_continuous_mapper(ContinuousKind::LearnedMlp, &[], &f, &mut rng),
            Err(Error::EmptySample)
        ));
        assert!(fit_continuous_mapper(ContinuousKind::RandomMlp, &sample(4, 1, 1), &f, &mut rng).is_err());
        assert!(init_random_mlp::<f64, _>(0, &mut rng).is_err());
    }

    #[test]
    fn random_mlp_weights_within_glorot_bound() {
        let mut rng = seeded(2);
        let m = init_random_mlp::<f64, _>(5, &mut rng).unwrap();
        let bound = (6.0f64 / 15.0).sqrt();
        let ContinuousModel::Mlp(net) = &m.model else {
            panic!("random MLP holds an MLP")
        };
        assert!(net.hidden_weights.iter().flatten().all(|w| w.abs() <= bound));
        let again = init_random_mlp::<f64, _>(5, &mut seeded(2)).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn single_input_random_mlp_separates_points() {
        let m = init_random_mlp::<f64, _>(1, &mut seeded(4)).unwrap();
        let mut outs: Vec<f64> = (0..100)
            .map(|i| m.predict(&[-3.0 + 0.06 * i as f64]).unwrap())
            .collect();
        outs.sort_by(f64::total_cmp);
        outs.dedup();
        assert_eq!(outs.len(), 100);
    }

    #[test]
    fn learned_mlp_output_is_finite_and_pure() {
        let x = sample(1024, 2, 7);
        let mut rng = seeded(3);
        let f = TargetFunction::random(TargetKind::Sine, 2, 0.05, &mut rng).unwrap();
        let m = fit_continuous_mapper(ContinuousKind::LearnedMlp, &x, &f, &mut rng).unwrap();
        let a = m.predict(&x[0]).unwrap();
        assert!(a.is_finite());
        assert_eq!(a, m.predict(&x[0]).unwrap());
    }
}
