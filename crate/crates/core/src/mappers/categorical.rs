//! Mappers that turn parent values into a class index.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::standardize::Standardizer;
use crate::error::{Error, Result};
use crate::scalar::{mean_std, Real};

pub const SPREAD_RANGE: (f64, f64) = (0.1, 0.5);
pub const MAX_CENTROIDS_PER_CLASS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CategoricalKind {
    Prototype,
    GaussianPrototype,
    RandomRbf,
    Hyperplane,
}

impl CategoricalKind {
    pub const ALL: [CategoricalKind; 4] = [
        CategoricalKind::Prototype,
        CategoricalKind::GaussianPrototype,
        CategoricalKind::RandomRbf,
        CategoricalKind::Hyperplane,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CategoricalKind::Prototype => "prototype",
            CategoricalKind::GaussianPrototype => "gaussian-prototype",
            CategoricalKind::RandomRbf => "random-rbf",
            CategoricalKind::Hyperplane => "hyperplane",
        }
    }

    pub fn uses_centroids(self) -> bool {
        self != CategoricalKind::Hyperplane
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distance {
    #[default]
    Euclidean,
    Manhattan,
}

impl Distance {
    pub fn toggled(self) -> Self {
        match self {
            Distance::Euclidean => Distance::Manhattan,
            Distance::Manhattan => Distance::Euclidean,
        }
    }

    pub fn eval<F: Real>(self, a: &[F], b: &[F]) -> F {
        match self {
            Distance::Euclidean => sq_dist(a, b).sqrt(),
            Distance::Manhattan => a
                .iter()
                .zip(b)
                .fold(F::zero(), |acc, (&x, &y)| acc + (x - y).abs()),
        }
    }
}

fn sq_dist<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .fold(F::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Centroid<F> {
    pub position: Vec<F>,
    pub class: usize,
    /// Isotropic spread; unused by the plain prototype mapper.
    pub spread: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperplane<F> {
    pub weights: Vec<F>,
    pub bias: F,
}

impl<F: Real> Hyperplane<F> {
    /// Rotates the normal by `angle` radians inside the plane spanned by the normal
    /// and the unit vector `u`, which must be orthogonal to it. The norm is preserved.
    pub fn rotated(&self, u: &[F], angle: F) -> Self {
        let norm = self.weights.iter().fold(F::zero(), |a, &w| a + w * w).sqrt();
        let (s, c) = angle.sin_cos();
        Hyperplane {
            weights: self
                .weights
                .iter()
                .zip(u)
                .map(|(&w, &v)| c * w + s * norm * v)
                .collect(),
            bias: self.bias,
        }
    }

    /// Draws a unit vector orthogonal to the normal (Gram-Schmidt on a Gaussian draw).
    pub fn rotation_axis<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<F>> {
        let p = self.weights.len();
        if p < 2 {
            return Err(Error::param("rotating a hyperplane needs at least two parents"));
        }
        let wn = self.weights.iter().fold(F::zero(), |a, &w| a + w * w);
        if !(wn > F::zero()) {
            return Err(Error::Degenerate("hyperplane normal is zero".into()));
        }
        loop {
            let g: Vec<F> = (0..p).map(|_| F::standard_normal(rng)).collect();
            let dot = g.iter().zip(&self.weights).fold(F::zero(), |a, (&x, &w)| a + x * w);
            let u: Vec<F> = g
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| x - dot / wn * w)
                .collect();
            let un = u.iter().fold(F::zero(), |a, &v| a + v * v).sqrt();
            if un > F::lit(1e-6) {
                return Ok(u.into_iter().map(|v| v / un).collect());
            }
        }
    }
}

/// Summary of one parent's fit-sample distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParentStats<F> {
    pub min: F,
    pub max: F,
    pub mean: F,
    pub scale: F,
}

impl<F: Real> ParentStats<F> {
    pub fn from_samples(rows: &[Vec<F>]) -> Result<Vec<Self>> {
        let first = rows.first().ok_or(Error::EmptySample)?;
        Ok((0..first.len())
            .map(|j| {
                let col: Vec<F> = rows.iter().map(|r| r[j]).collect();
                let (mean, scale) = mean_std(&col);
                let min = col.iter().copied().fold(F::infinity(), F::min);
                let max = col.iter().copied().fold(F::neg_infinity(), F::max);
                ParentStats {
                    min,
                    max,
                    mean,
                    scale,
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoricalMapper<F> {
    pub kind: CategoricalKind,
    pub n_classes: usize,
    pub input: Standardizer<F>,
    pub centroids: Vec<Centroid<F>>,
    pub distance: Distance,
    pub hyperplane: Option<Hyperplane<F>>,
}

/// Inclusive range for the number of centroids each class owns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentroidRange {
    pub min: usize,
    pub max: usize,
}

impl Default for CentroidRange {
    fn default() -> Self {
        CentroidRange {
            min: 1,
            max: MAX_CENTROIDS_PER_CLASS,
        }
    }
}

fn standardizer_from<F: Real>(stats: &[ParentStats<F>]) -> Standardizer<F> {
    Standardizer {
        mean: stats.iter().map(|s| s.mean).collect(),
        scale: stats
            .iter()
            .map(|s| if s.scale > F::epsilon() { s.scale } else { F::one() })
            .collect(),
    }
}

/// Draws positions uniformly inside the parent box, expressed in the coordinates of `input`.
fn draw_positions<F: Real, R: Rng + ?Sized>(
    input: &Standardizer<F>,
    stats: &[ParentStats<F>],
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec<F>>> {
    if stats.iter().all(|s| !(s.max > s.min)) {
        return Err(Error::Degenerate("parent box has zero extent on every axis".into()));
    }
    let lo = input.apply(&stats.iter().map(|s| s.min).collect::<Vec<_>>());
    let hi = input.apply(&stats.iter().map(|s| s.max).collect::<Vec<_>>());
    Ok((0..count)
        .map(|_| {
            lo.iter()
                .zip(&hi)
                .map(|(&a, &b)| F::uniform(rng, a, b))
                .collect()
        })
        .collect())
}

pub fn init_categorical_mapper<F: Real, R: Rng + ?Sized>(
    kind: CategoricalKind,
    stats: &[ParentStats<F>],
    n_classes: usize,
    per_class: CentroidRange,
    rng: &mut R,
) -> Result<CategoricalMapper<F>> {
    if n_classes < 2 {
        return Err(Error::param("a categorical mapper needs at least two classes"));
    }
    if stats.is_empty() {
        return Err(Error::param("a categorical mapper needs at least one parent"));
    }
    if per_class.min < 1 || per_class.max < per_class.min || per_class.max > MAX_CENTROIDS_PER_CLASS {
        return Err(Error::param("centroids per class must lie within [1, 3]"));
    }
    let input = standardizer_from(stats);
    if kind == CategoricalKind::Hyperplane {
        if n_classes != 2 {
            return Err(Error::param("the hyperplane mapper only supports two classes"));
        }
        if stats.iter().all(|s| !(s.max > s.min)) {
            return Err(Error::Degenerate("parent box has zero extent on every axis".into()));
        }
        let weights = (0..stats.len()).map(|_| F::standard_normal(rng)).collect();
        let bias = F::uniform(rng, F::lit(-0.1), F::lit(0.1));
        return Ok(CategoricalMapper {
            kind,
            n_classes,
            input,
            centroids: Vec::new(),
            distance: Distance::Euclidean,
            hyperplane: Some(Hyperplane { weights, bias }),
        });
    }
    let classes: Vec<usize> = (0..n_classes)
        .flat_map(|c| {
            let k = rng.random_range(per_class.min..=per_class.max);
            std::iter::repeat_n(c, k)
        })
        .collect();
    let positions = draw_positions(&input, stats, classes.len(), rng)?;
    let centroids = classes
        .into_iter()
        .zip(positions)
        .map(|(class, position)| Centroid {
            position,
            class,
            spread: F::uniform(rng, F::lit(SPREAD_RANGE.0), F::lit(SPREAD_RANGE.1)),
        })
        .collect();
    Ok(CategoricalMapper {
        kind,
        n_classes,
        input,
        centroids,
        distance: Distance::Euclidean,
        hyperplane: None,
    })
}

impl<F: Real> CategoricalMapper<F> {
    /// Builds a centroid mapper operating directly on raw parent values.
    pub fn from_centroids(
        kind: CategoricalKind,
        n_classes: usize,
        centroids: Vec<Centroid<F>>,
        distance: Distance,
    ) -> Result<Self> {
        let arity = centroids
            .first()
            .map(|c| c.position.len())
            .ok_or_else(|| Error::param("at least one centroid required"))?;
        let m = CategoricalMapper {
            kind,
            n_classes,
            input: Standardizer::identity(arity),
            centroids,
            distance,
            hyperplane: None,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn from_hyperplane(hyperplane: Hyperplane<F>) -> Result<Self> {
        let m = CategoricalMapper {
            kind: CategoricalKind::Hyperplane,
            n_classes: 2,
            input: Standardizer::identity(hyperplane.weights.len()),
            centroids: Vec::new(),
            distance: Distance::Euclidean,
            hyperplane: Some(hyperplane),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.arity();
        if self.n_classes < 2 {
            return Err(Error::param("a categorical mapper needs at least two classes"));
        }
        if self.input.scale.iter().any(|s| !(*s > F::zero())) {
            return Err(Error::param("standardization scales must be positive"));
        }
        if self.kind == CategoricalKind::Hyperplane {
            let h = self
                .hyperplane
                .as_ref()
                .ok_or_else(|| Error::param("hyperplane mapper without a hyperplane"))?;
            if self.n_classes != 2 {
                return Err(Error::param("the hyperplane mapper only supports two classes"));
            }
            if h.weights.len() != p {
                return Err(Error::Arity {
                    expected: p,
                    got: h.weights.len(),
                });
            }
            return Ok(());
        }
        let mut owned = vec![false; self.n_classes];
        for c in &self.centroids {
            if c.position.len() != p {
                return Err(Error::Arity {
                    expected: p,
                    got: c.position.len(),
                });
            }
            if c.class >= self.n_classes {
                return Err(Error::param("centroid class out of range"));
            }
            if self.kind != CategoricalKind::Prototype && !(c.spread > F::zero()) {
                return Err(Error::param("centroid spread must be positive"));
            }
            owned[c.class] = true;
        }
        if owned.iter().any(|o| !o) {
            return Err(Error::param("every class must own at least one centroid"));
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.input.arity()
    }

    /// Class index for raw parent values; ties go to the lowest centroid index.
    pub fn predict(&self, parents: &[F]) -> Result<usize> {
        if parents.len() != self.arity() {
            return Err(Error::Arity {
                expected: self.arity(),
                got: parents.len(),
            });
        }
        let x = self.input.apply(parents);
        if let Some(h) = &self.hyperplane {
            let s = h.weights.iter().zip(&x).fold(h.bias, |a, (&w, &v)| a + w * v);
            return Ok(usize::from(s > F::zero()));
        }
        let p = F::from_count(x.len());
        let two = F::lit(2.0);
        // every kind reduces to maximizing a log-score
        let score = |c: &Centroid<F>| -> F {
            match self.kind {
                CategoricalKind::Prototype => -self.distance.eval(&x, &c.position),
                CategoricalKind::GaussianPrototype => {
                    -p * c.spread.ln() - sq_dist(&x, &c.position) / (two * c.spread * c.spread)
                }
                CategoricalKind::RandomRbf => {
                    -sq_dist(&x, &c.position) / (two * c.spread * c.spread)
                }
                CategoricalKind::Hyperplane => unreachable!(),
            }
        };
        let mut best: Option<(F, usize)> = None;
        for c in &self.centroids {
            let s = score(c);
            if best.is_none_or(|(b, _)| s > b) {
                best = Some((s, c.class));
            }
        }
        best.map(|(_, class)| class)
            .ok_or_else(|| Error::Degenerate("mapper has no centroids".into()))
    }

    /// Fresh centroid positions drawn inside the box described by `stats`.
    pub fn draw_positions<R: Rng + ?Sized>(
        &self,
        stats: &[ParentStats<F>],
        rng: &mut R,
    ) -> Result<Vec<Vec<F>>> {
        if stats.len() != self.arity() {
            return Err(Error::Arity {
                expected: self.arity(),
                got: stats.len(),
            });
        }
        draw_positions(&self.input, stats, self.centroids.len(), rng)
    }

    pub fn positions(&self) -> Vec<Vec<F>> {
        self.centroids.iter().map(|c| c.position.clone()).collect()
    }

    pub fn set_positions(&mut self, positions: Vec<Vec<F>>) {
        for (c, p) in self.centroids.iter_mut().zip(positions) {
            c.position = p;
        }
    }
}
