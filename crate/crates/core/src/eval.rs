//! Prequential (test-then-train) evaluation with built-in online learners.

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::drift::DriftSchedule;
use crate::error::{Error, Result};
use crate::generator::{FeatureValue, Instance, Label};
use crate::graph::Task;
use crate::rng::{substream, StreamRng, Substream};
use crate::scalar::Real;

pub const DEFAULT_WINDOW: usize = 100;
pub const DEFAULT_WARMUP: usize = 100;
pub const LEARNERS: [&str; 5] = ["logistic", "naive-bayes", "sgd-regressor", "majority", "constant"];

/// An incremental model. `predict` must not change state.
pub trait OnlineLearner<F: Real> {
    fn name(&self) -> &str;
    fn task(&self) -> Task;
    fn predict(&self, x: &[Option<F>]) -> Label<F>;
    fn learn(&mut self, x: &[Option<F>], y: Label<F>) -> Result<()>;
}

/// Running per-feature mean and variance of observed values.
#[derive(Debug, Clone, Default)]
pub struct RunningStats<F> {
    count: Vec<u64>,
    mean: Vec<F>,
    m2: Vec<F>,
}

impl<F: Real> RunningStats<F> {
    fn ensure(&mut self, d: usize) -> Result<()> {
        if self.mean.is_empty() && d > 0 {
            self.count = vec![0; d];
            self.mean = vec![F::zero(); d];
            self.m2 = vec![F::zero(); d];
        }
        if self.mean.len() != d {
            return Err(Error::Arity {
                expected: self.mean.len(),
                got: d,
            });
        }
        Ok(())
    }

    pub fn update(&mut self, x: &[Option<F>]) -> Result<()> {
        self.ensure(x.len())?;
        for (j, v) in x.iter().enumerate() {
            if let Some(v) = *v {
                self.count[j] += 1;
                let n = F::from_u64(self.count[j]).unwrap_or_else(F::max_value);
                let delta = v - self.mean[j];
                self.mean[j] = self.mean[j] + delta / n;
                self.m2[j] = self.m2[j] + delta * (v - self.mean[j]);
            }
        }
        Ok(())
    }

    pub fn mean(&self, j: usize) -> F {
        self.mean.get(j).copied().unwrap_or_else(F::zero)
    }

    pub fn std(&self, j: usize) -> F {
        match self.count.get(j) {
            Some(&c) if c > 1 => (self.m2[j] / F::from_u64(c).unwrap_or_else(F::max_value)).sqrt(),
            _ => F::zero(),
        }
    }

    /// Missing entries replaced by the running mean.
    pub fn impute(&self, x: &[Option<F>]) -> Vec<F> {
        x.iter()
            .enumerate()
            .map(|(j, v)| v.unwrap_or_else(|| self.mean(j)))
            .collect()
    }

    /// Imputed and standardized by the running moments.
    pub fn standardize(&self, x: &[Option<F>]) -> Vec<F> {
        self.impute(x)
            .into_iter()
            .enumerate()
            .map(|(j, v)| {
                let s = self.std(j);
                (v - self.mean(j)) / if s > F::epsilon() { s } else { F::one() }
            })
            .collect()
    }
}

fn class_of<F: Real>(y: Label<F>) -> Result<usize> {
    y.class()
        .ok_or_else(|| Error::param("classifier received a real-valued label"))
}

fn value_of<F: Real>(y: Label<F>) -> Result<F> {
    match y {
        Label::Value(v) => Ok(v),
        Label::Class(_) => Err(Error::param("regressor received a class label")),
    }
}

/// Multinomial logistic regression trained by one gradient step per instance on
/// running-standardized inputs. Classes are added as they appear.
#[derive(Debug, Clone)]
pub struct LogisticRegression<F> {
    pub learning_rate: F,
    pub l2: F,
    stats: RunningStats<F>,
    weights: Vec<Vec<F>>,
    bias: Vec<F>,
}

impl<F: Real> Default for LogisticRegression<F> {
    fn default() -> Self {
        LogisticRegression {
            learning_rate: F::lit(0.05),
            l2: F::lit(1e-4),
            stats: RunningStats::default(),
            weights: Vec::new(),
            bias: Vec::new(),
        }
    }
}

impl<F: Real> LogisticRegression<F> {
    fn scores(&self, z: &[F]) -> Vec<F> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, &b)| w.iter().zip(z).fold(b, |s, (&wi, &zi)| s + wi * zi))
            .collect()
    }
}

fn argmax<F: Real>(v: &[F]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

impl<F: Real> OnlineLearner<F> for LogisticRegression<F> {
    fn name(&self) -> &str {
        "logistic"
    }

    fn task(&self) -> Task {
        Task::Classification
    }

    fn predict(&self, x: &[Option<F>]) -> Label<F> {
        if self.weights.is_empty() {
            return Label::Class(0);
        }
        Label::Class(argmax(&self.scores(&self.stats.standardize(x))))
    }

    fn learn(&mut self, x: &[Option<F>], y: Label<F>) -> Result<()> {
        let c = class_of(y)?;
        self.stats.update(x)?;
        let d = x.len();
        while self.weights.len() <= c {
            self.weights.push(vec![F::zero(); d]);
            self.bias.push(F::zero());
        }
        let z = self.stats.standardize(x);
        let s = self.scores(&z);
        let m = s.iter().copied().fold(F::neg_infinity(), F::max);
        let e: Vec<F> = s.iter().map(|&v| (v - m).exp()).collect();
        let total = e.iter().copied().fold(F::zero(), |a, b| a + b);
        let lr = self.learning_rate;
        for (k, (w, b)) in self.weights.iter_mut().zip(self.bias.iter_mut()).enumerate() {
            let p = e[k] / total;
            let g = p - if k == c { F::one() } else { F::zero() };
            for (wi, &zi) in w.iter_mut().zip(&z) {
                *wi = *wi - lr * (g * zi + self.l2 * *wi);
            }
            *b = *b - lr * g;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct ClassStats<F> {
    count: u64,
    stats: RunningStats<F>,
}

/// Gaussian naive Bayes with per-class running moments on imputed inputs.
#[derive(Debug, Clone, Default)]
pub struct GaussianNaiveBayes<F> {
    imputer: RunningStats<F>,
    classes: Vec<Option<ClassStats<F>>>,
    total: u64,
}

impl<F: Real> OnlineLearner<F> for GaussianNaiveBayes<F> {
    fn name(&self) -> &str {
        "naive-bayes"
    }

    fn task(&self) -> Task {
        Task::Classification
    }

    fn predict(&self, x: &[Option<F>]) -> Label<F> {
        if self.total == 0 {
            return Label::Class(0);
        }
        let v = self.imputer.impute(x);
        let max_var = (0..v.len())
            .map(|j| self.imputer.std(j) * self.imputer.std(j))
            .fold(F::zero(), F::max);
        let eps = F::lit(1e-9) * max_var + F::lit(1e-9);
        let two_pi = F::lit(std::f64::consts::TAU);
        let total = F::from_u64(self.total).unwrap_or_else(F::max_value);
        let mut best = (0, F::neg_infinity());
        for (c, cs) in self.classes.iter().enumerate() {
            let Some(cs) = cs else { continue };
            let n = F::from_u64(cs.count).unwrap_or_else(F::max_value);
            let mut ll = (n / total).ln();
            for (j, &xj) in v.iter().enumerate() {
                let s = cs.stats.std(j);
                let var = s * s + eps;
                let d = xj - cs.stats.mean(j);
                ll = ll - F::lit(0.5) * (two_pi * var).ln() - d * d / (F::lit(2.0) * var);
            }
            if ll > best.1 {
                best = (c, ll);
            }
        }
        Label::Class(best.0)
    }

    fn learn(&mut self, x: &[Option<F>], y: Label<F>) -> Result<()> {
        let c = class_of(y)?;
        self.imputer.update(x)?;
        let v: Vec<Option<F>> = self.imputer.impute(x).into_iter().map(Some).collect();
        if self.classes.len() <= c {
            self.classes.resize(c + 1, None);
        }
        let cs = self.classes[c].get_or_insert_with(|| ClassStats {
            count: 0,
            stats: RunningStats::default(),
        });
        cs.count += 1;
        cs.stats.update(&v)?;
        self.total += 1;
        Ok(())
    }
}

/// Linear least-squares regressor with a constant-step SGD update per instance on
/// running-standardized inputs.
#[derive(Debug, Clone)]
pub struct SgdRegressor<F> {
    pub learning_rate: F,
    stats: RunningStats<F>,
    weights: Vec<F>,
    bias: F,
}

impl<F: Real> Default for SgdRegressor<F> {
    fn default() -> Self {
        SgdRegressor {
            learning_rate: F::lit(0.01),
            stats: RunningStats::default(),
            weights: Vec::new(),
            bias: F::zero(),
        }
    }
}

impl<F: Real> SgdRegressor<F> {
    fn output(&self, z: &[F]) -> F {
        self.weights
            .iter()
            .zip(z)
            .fold(self.bias, |s, (&w, &v)| s + w * v)
    }
}

impl<F: Real> OnlineLearner<F> for SgdRegressor<F> {
    fn name(&self) -> &str {
        "sgd-regressor"
    }

    fn task(&self) -> Task {
        Task::Regression
    }

    fn predict(&self, x: &[Option<F>]) -> Label<F> {
        Label::Value(self.output(&self.stats.standardize(x)))
    }

    fn learn(&mut self, x: &[Option<F>], y: Label<F>) -> Result<()> {
        let target = value_of(y)?;
        self.stats.update(x)?;
        if self.weights.is_empty() {
            self.weights = vec![F::zero(); x.len()];
        }
        let z = self.stats.standardize(x);
        let err = self.output(&z) - target;
        let lr = self.learning_rate;
        for (w, &v) in self.weights.iter_mut().zip(&z) {
            *w = *w - lr * err * v;
        }
        self.bias = self.bias - lr * err;
        if !self.bias.is_finite() {
            return Err(Error::FitFailed("regressor diverged".into()));
        }
        Ok(())
    }
}

/// Predicts the most frequent class seen so far.
#[derive(Debug, Clone, Default)]
pub struct MajorityClass {
    counts: Vec<u64>,
}

impl<F: Real> OnlineLearner<F> for MajorityClass {
    fn name(&self) -> &str {
        "majority"
    }

    fn task(&self) -> Task {
        Task::Classification
    }

    fn predict(&self, _x: &[Option<F>]) -> Label<F> {
        let mut best = 0;
        for (c, &n) in self.counts.iter().enumerate() {
            if n > self.counts[best] {
                best = c;
            }
        }
        Label::Class(best)
    }

    fn learn(&mut self, _x: &[Option<F>], y: Label<F>) -> Result<()> {
        let c = class_of(y)?;
        if self.counts.len() <= c {
            self.counts.resize(c + 1, 0);
        }
        self.counts[c] += 1;
        Ok(())
    }
}

/// Always predicts the same value.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConstantRegressor<F> {
    pub value: F,
}

impl<F: Real> OnlineLearner<F> for ConstantRegressor<F> {
    fn name(&self) -> &str {
        "constant"
    }

    fn task(&self) -> Task {
        Task::Regression
    }

    fn predict(&self, _x: &[Option<F>]) -> Label<F> {
        Label::Value(self.value)
    }

    fn learn(&mut self, _x: &[Option<F>], y: Label<F>) -> Result<()> {
        value_of(y).map(|_| ())
    }
}

pub fn learner_by_name<F: Real + 'static>(name: &str) -> Result<Box<dyn OnlineLearner<F>>> {
    Ok(match name {
        "logistic" => Box::new(LogisticRegression::default()),
        "naive-bayes" => Box::new(GaussianNaiveBayes::default()),
        "sgd-regressor" => Box::new(SgdRegressor::default()),
        "majority" => Box::new(MajorityClass::default()),
        "constant" => Box::new(ConstantRegressor { value: F::zero() }),
        _ => return Err(Error::UnknownLearner(name.to_string())),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Accuracy,
    Mae,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Mae => "mae",
        }
    }

    pub fn higher_is_better(self) -> bool {
        self == Metric::Accuracy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrequentialOptions {
    pub window: usize,
    /// Leading instances used only for training.
    pub warmup: usize,
    /// Steps between an instance's arrival and delivery of its label.
    pub delay: u64,
    /// Share of post-warmup labels ever delivered.
    pub label_fraction: f64,
    /// Seeds the label-selection draws when `label_fraction` is not `1/k`.
    pub seed: u64,
}

impl Default for PrequentialOptions {
    fn default() -> Self {
        PrequentialOptions {
            window: DEFAULT_WINDOW,
            warmup: DEFAULT_WARMUP,
            delay: 0,
            label_fraction: 1.0,
            seed: 0,
        }
    }
}

impl PrequentialOptions {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.label_fraction) {
            return Err(Error::Config("label fraction must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Decides which post-warmup instances will eventually be labeled.
#[derive(Debug, Clone)]
pub struct LabelSelector {
    fraction: f64,
    every: Option<u64>,
    rng: StreamRng,
}

impl LabelSelector {
    pub fn new(fraction: f64, seed: u64) -> Self {
        let every = if fraction > 0.0 && fraction < 1.0 {
            let k = (1.0 / fraction).round();
            ((1.0 / fraction - k).abs() < 1e-9).then_some(k as u64)
        } else {
            None
        };
        LabelSelector {
            fraction,
            every,
            rng: substream(seed, Substream::Labels),
        }
    }

    /// Whether the `j`-th post-warmup instance gets a label.
    pub fn labeled(&mut self, j: u64) -> bool {
        if self.fraction >= 1.0 {
            true
        } else if self.fraction <= 0.0 {
            false
        } else if let Some(k) = self.every {
            j % k == 0
        } else {
            rand::Rng::random::<f64>(&mut self.rng) < self.fraction
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrequentialCurve<F> {
    pub metric: Metric,
    pub window: usize,
    pub initial_train: usize,
    /// Stream index of each evaluated instance.
    pub t: Vec<u64>,
    /// Per-instance score: 1/0 correctness or absolute error.
    pub scores: Vec<F>,
    /// Mean score over the last `window` evaluated instances.
    pub values: Vec<F>,
}

impl<F: Real> PrequentialCurve<F> {
    pub fn value_at(&self, t: u64) -> Option<F> {
        let first = *self.t.first()?;
        let i = usize::try_from(t.checked_sub(first)?).ok()?;
        self.values.get(i).copied()
    }

    /// Mean per-instance score over all evaluated instances.
    pub fn mean_score(&self) -> F {
        if self.scores.is_empty() {
            return F::zero();
        }
        self.scores.iter().copied().fold(F::zero(), |a, b| a + b) / F::from_count(self.scores.len())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(
            out,
            "# prequential {}, window {}, first {} instances used only for training",
            self.metric.name(),
            self.window,
            self.initial_train
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", self.metric.name()])?;
        for (t, v) in self.t.iter().zip(&self.values) {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn features<F: Real>(inst: &Instance<F>) -> Vec<Option<F>> {
    inst.features.iter().map(FeatureValue::as_real).collect()
}

/// Test-then-train over `stream`, with labels revealed `delay` steps late and only
/// for the selected share of instances. Warmup labels arrive immediately.
pub fn prequential_run<F: Real>(
    stream: impl IntoIterator<Item = Instance<F>>,
    learner: &mut dyn OnlineLearner<F>,
    opts: &PrequentialOptions,
) -> Result<PrequentialCurve<F>> {
    opts.validate()?;
    let metric = match learner.task() {
        Task::Classification => Metric::Accuracy,
        Task::Regression => Metric::Mae,
    };
    let mut selector = LabelSelector::new(opts.label_fraction, opts.seed);
    let mut pending: VecDeque<(u64, Vec<Option<F>>, Label<F>)> = VecDeque::new();
    let mut curve = PrequentialCurve {
        metric,
        window: opts.window,
        initial_train: opts.warmup,
        t: Vec::new(),
        scores: Vec::new(),
        values: Vec::new(),
    };
    let mut running = F::zero();
    let mut seen = 0usize;
    for (i, inst) in stream.into_iter().enumerate() {
        seen += 1;
        let x = features(&inst);
        match (metric, inst.label) {
            (Metric::Accuracy, Label::Class(_)) | (Metric::Mae, Label::Value(_)) => {}
            _ => {
                return Err(Error::param(format!(
                    "{} learner does not match the stream's label type",
                    learner.name()
                )))
            }
        }
        if i < opts.warmup {
            learner.learn(&x, inst.label)?;
            continue;
        }
        let score = match (learner.predict(&x), inst.label) {
            (Label::Class(p), Label::Class(y)) => F::from_count(usize::from(p == y)),
            (pred, y) => (pred.as_real() - y.as_real()).abs(),
        };
        curve.t.push(inst.t);
        curve.scores.push(score);
        running = running + score;
        let n = curve.scores.len();
        if n > opts.window {
            running = running - curve.scores[n - 1 - opts.window];
        }
        // Re-sum periodically so long runs do not accumulate rounding drift.
        if n % 4096 == 0 {
            running = curve.scores[n.saturating_sub(opts.window)..]
                .iter()
                .copied()
                .fold(F::zero(), |a, b| a + b);
        }
        curve.values.push(running / F::from_count(n.min(opts.window)));
        if selector.labeled((i - opts.warmup) as u64) {
            pending.push_back((inst.t + opts.delay, x, inst.label));
        }
        while pending.front().is_some_and(|(due, _, _)| *due <= inst.t) {
            let (_, px, py) = pending.pop_front().expect("front exists");
            learner.learn(&px, py)?;
        }
    }
    if seen == 0 {
        return Err(Error::EmptySample);
    }
    if seen <= opts.warmup {
        return Err(Error::Insufficient(format!(
            "stream of {seen} instances does not outlast the {}-instance warmup",
            opts.warmup
        )));
    }
    Ok(curve)
}

/// Windowed mean absolute error for a regressor.
pub fn mae_prequential<F: Real>(
    stream: impl IntoIterator<Item = Instance<F>>,
    regressor: &mut dyn OnlineLearner<F>,
    opts: &PrequentialOptions,
) -> Result<PrequentialCurve<F>> {
    if regressor.task() != Task::Regression {
        return Err(Error::param("MAE evaluation needs a regressor"));
    }
    prequential_run(stream, regressor, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventWindow {
    pub start: u64,
    pub width: u64,
    /// Last instance before the next event starts (or the stream ends).
    pub concept_end: u64,
}

pub fn event_windows<F: Real>(schedule: &DriftSchedule<F>, len: u64) -> Vec<EventWindow> {
    let ev = &schedule.events;
    ev.iter()
        .enumerate()
        .map(|(i, e)| EventWindow {
            start: e.start,
            width: e.width,
            concept_end: ev.get(i + 1).map_or(len, |n| n.start).saturating_sub(1),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftResponse<F> {
    pub start: u64,
    /// Pre-event plateau minus the worst post-event value, never negative. For MAE
    /// curves this is the rise in error.
    pub drop: F,
    /// Share of the drop regained by the end of the concept; 1 when nothing dropped.
    pub recovery: F,
    pub worst_at: u64,
}

/// Drop depth and recovery per event. The plateau is the mean of the `window` curve
/// points before the event; the worst point is searched over the event window plus
/// `2 * window` instances.
pub fn drift_response<F: Real>(
    curve: &PrequentialCurve<F>,
    events: &[EventWindow],
    window: usize,
) -> Result<Vec<DriftResponse<F>>> {
    let sign = if curve.metric.higher_is_better() { F::one() } else { -F::one() };
    let w = window as u64;
    let (Some(&first), Some(&last)) = (curve.t.first(), curve.t.last()) else {
        return Err(Error::Insufficient("empty curve".into()));
    };
    let at = |t: u64| curve.value_at(t).map(|v| sign * v);
    events
        .iter()
        .map(|e| {
            let horizon = e.start + e.width.max(1) - 1 + 2 * w;
            if e.start < first + w || horizon > last || e.concept_end > last || horizon > e.concept_end {
                return Err(Error::Insufficient(format!(
                    "curve does not cover the event at {} with a {window}-point margin",
                    e.start
                )));
            }
            let plateau = (e.start - w..e.start)
                .map(|t| at(t).expect("covered"))
                .fold(F::zero(), |a, b| a + b)
                / F::from_u64(w).unwrap_or_else(F::max_value);
            let (worst_at, worst) = (e.start..=horizon)
                .map(|t| (t, at(t).expect("covered")))
                .fold((e.start, F::infinity()), |best, cur| if cur.1 < best.1 { cur } else { best });
            let mut drop = (plateau - worst).max(F::zero());
            // Averaging a flat stretch can leave a rounding residue.
            if drop <= F::epsilon() * F::lit(8.0) * plateau.abs().max(F::one()) {
                drop = F::zero();
            }
            let recovery = if drop > F::zero() {
                (at(e.concept_end).expect("covered") - worst) / drop
            } else {
                F::one()
            };
            Ok(DriftResponse {
                start: e.start,
                drop,
                recovery,
                worst_at,
            })
        })
        .collect()
}

pub fn write_drift_summary<F: Real, W: Write>(out: W, rows: &[DriftResponse<F>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["start", "drop", "recovery", "worst_at"])?;
    for r in rows {
        w.write_record([
            r.start.to_string(),
            r.drop.to_string(),
            r.recovery.to_string(),
            r.worst_at.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(t: u64, x: f64, y: usize) -> Instance<f64> {
        Instance {
            t,
            features: vec![FeatureValue::Real(x)],
            label: Label::Class(y),
            meta: Default::default(),
        }
    }

    fn curve(values: Vec<f64>) -> PrequentialCurve<f64> {
        PrequentialCurve {
            metric: Metric::Accuracy,
            window: 1,
            initial_train: 0,
            t: (0..values.len() as u64).collect(),
            scores: values.clone(),
            values,
        }
    }

    #[test]
    fn step_curve_response() {
        let mut v = vec![0.9; 100];
        v.extend(vec![0.5; 50]);
        v.extend(vec![0.8; 50]);
        let ev = [EventWindow { start: 100, width: 1, concept_end: 199 }];
        let r = drift_response(&curve(v), &ev, 10).unwrap();
        assert!((r[0].drop - 0.4).abs() < 1e-12);
        assert!((r[0].recovery - 0.75).abs() < 1e-12);
        let flat = drift_response(&curve(vec![0.7; 200]), &ev, 10).unwrap();
        assert_eq!(flat[0].drop, 0.0);
        assert_eq!(flat[0].recovery, 1.0);
        assert!(drift_response(&curve(vec![0.7; 105]), &ev, 10).is_err());
    }

    #[test]
    fn label_selector_patterns() {
        let mut half = LabelSelector::new(0.5, 0);
        let picks: Vec<bool> = (0..6).map(|j| half.labeled(j)).collect();
        assert_eq!(picks, vec![true, false, true, false, true, false]);
        let mut none = LabelSelector::new(0.0, 0);
        assert!((0..100).all(|j| !none.labeled(j)));
        let mut some = LabelSelector::new(0.3, 1);
        let n = (0..10_000).filter(|&j| some.labeled(j)).count();
        assert!((2700..3300).contains(&n));
    }

    #[test]
    fn majority_curve_tracks_prior() {
        let stream: Vec<_> = (0..1000).map(|t| inst(t, 0.0, usize::from(t % 4 == 0))).collect();
        let mut m = MajorityClass::default();
        let c = prequential_run(stream, &mut m, &PrequentialOptions::default()).unwrap();
        assert_eq!(c.values.len(), 900);
        assert!((c.mean_score() - 0.75).abs() < 0.01);
    }

    #[test]
    fn errors() {
        let mut lr = LogisticRegression::<f64>::default();
        assert!(matches!(
            prequential_run(Vec::new(), &mut lr, &PrequentialOptions::default()),
            Err(Error::EmptySample)
        ));
        let short: Vec<_> = (0..50).map(|t| inst(t, 0.0, 0)).collect();
        assert!(prequential_run(short, &mut lr, &PrequentialOptions::default()).is_err());
        let mut reg = SgdRegressor::<f64>::default();
        let stream: Vec<_> = (0..200).map(|t| inst(t, 0.0, 0)).collect();
        assert!(mae_prequential(stream.clone(), &mut reg, &PrequentialOptions::default()).is_err());
        assert!(mae_prequential(stream, &mut lr, &PrequentialOptions::default()).is_err());
        assert!(matches!(learner_by_name::<f64>("bogus"), Err(Error::UnknownLearner(_))));
    }

    #[test]
    fn learners_fit_separable_data() {
        let stream: Vec<_> = (0..2000)
            .map(|t| {
                let x = ((t * 7919) % 1000) as f64 / 100.0 - 5.0;
                inst(t, x, usize::from(x > 0.0))
            })
            .collect();
        for name in ["logistic", "naive-bayes"] {
            let mut l = learner_by_name::<f64>(name).unwrap();
            let c = prequential_run(stream.clone(), l.as_mut(), &PrequentialOptions::default()).unwrap();
            assert!(c.mean_score() > 0.9, "{name}: {}", c.mean_score());
        }
    }

    #[test]
    fn regressor_learns_line() {
        let stream: Vec<_> = (0..3000)
            .map(|t| {
                let x = ((t * 7919) % 1000) as f64 / 250.0 - 2.0;
                Instance {
                    t,
                    features: vec![FeatureValue::Real(x), FeatureValue::Missing],
                    label: Label::Value(3.0 * x + 1.0),
                    meta: Default::default(),
                }
            })
            .collect();
        let mut r = SgdRegressor::default();
        let c = mae_prequential(stream, &mut r, &PrequentialOptions::default()).unwrap();
        assert!(*c.values.last().unwrap() < 0.1);
    }
}
