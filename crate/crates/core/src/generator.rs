//! The streaming engine: interventions, missingness, temporal propagation and drift.

use rand::seq::{index, IndexedRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::concept::{init_concept, snapshot, Concept, ConceptSettings, NodeMapper};
use crate::drift::{
    apply_abrupt, apply_recurrent, draw_interventions, gradual_selector, DriftRate, DriftSchedule,
    ForcedValue, IncrementalShift, InterventionPolicy, Mechanism, RootChange, ShiftKind, ShiftSpec,
    Side, SnapshotStore, INITIAL_SNAPSHOT,
};
use crate::error::{Error, Result};
use crate::graph::{build_dag, CausalGraph, DagParams, GraphSpec, NodeId, NodeKind, Task};
use crate::mappers::{CategoricalKind, ContinuousKind};
use crate::rng::{substream, StreamRng, Substream};
use crate::scalar::Real;
use crate::temporal::{TemporalParams, TemporalState};

pub const MISSING_NODES: (usize, usize) = (1, 3);

/// Recipe for drawing a schedule once the concept is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomDrift {
    /// Number of concepts; `concepts - 1` events spaced evenly over the stream.
    pub concepts: usize,
    pub kinds: Vec<ShiftKind>,
    pub rates: Vec<DriftRate>,
    /// Window for gradual and incremental events, capped at half the spacing.
    pub width: u64,
}

impl Default for RandomDrift {
    fn default() -> Self {
        RandomDrift {
            concepts: 1,
            kinds: vec![
                ShiftKind::Distributional,
                ShiftKind::Covariate,
                ShiftKind::Severe,
                ShiftKind::Local,
                ShiftKind::Recurrent,
            ],
            rates: vec![DriftRate::Abrupt, DriftRate::Gradual],
            width: 250,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "F: Real"))]
pub struct GeneratorConfig<F> {
    pub dataset_size: u64,
    /// Per-instance intervention probability.
    #[serde(default = "F::zero")]
    pub p_i: F,
    /// Per-instance missingness probability.
    #[serde(default = "F::zero")]
    pub p_m: F,
    /// Random DAG parameters; ignored when `graph` is given.
    #[serde(default)]
    pub dag: Option<DagParams>,
    /// Explicit graph.
    #[serde(default)]
    pub graph: Option<GraphSpec>,
    #[serde(default)]
    pub temporal: TemporalParams<F>,
    #[serde(default)]
    pub concept: ConceptSettings<F>,
    #[serde(default)]
    pub schedule: DriftSchedule<F>,
    /// Drawn after concept initialization; `schedule` must then be empty.
    #[serde(default)]
    pub random_drift: Option<RandomDrift>,
    /// Emit only this many uniformly chosen non-target features.
    #[serde(default)]
    pub feature_subsample: Option<usize>,
    #[serde(default)]
    pub intervene_on_target: bool,
    #[serde(default = "default_forced")]
    pub forced_value: ForcedValue<F>,
}

fn default_forced<F: Real>() -> ForcedValue<F> {
    ForcedValue::Normal { spread: F::one() }
}

impl<F: Real> GeneratorConfig<F> {
    /// A drift-free stream over a random DAG.
    pub fn new(dataset_size: u64, dag: DagParams) -> Self {
        GeneratorConfig {
            dataset_size,
            p_i: F::zero(),
            p_m: F::zero(),
            dag: Some(dag),
            graph: None,
            temporal: TemporalParams::default(),
            concept: ConceptSettings::default(),
            schedule: DriftSchedule::default(),
            random_drift: None,
            feature_subsample: None,
            intervene_on_target: false,
            forced_value: default_forced(),
        }
    }

    pub fn intervention_policy(&self) -> InterventionPolicy<F> {
        InterventionPolicy {
            probability: self.p_i,
            include_target: self.intervene_on_target,
            forced: self.forced_value,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |v: F| v >= F::zero() && v <= F::one();
        if !prob(self.p_i) || !prob(self.p_m) {
            return Err(Error::Config("p_i and p_m must lie in [0, 1]".into()));
        }
        match (&self.dag, &self.graph) {
            (None, None) => return Err(Error::Config("either `dag` or `graph` is required".into())),
            (Some(d), None) => d.validate().map_err(|e| Error::Config(e.to_string()))?,
            _ => {}
        }
        self.temporal
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.intervention_policy().validate()?;
        self.schedule.validate()?;
        if let Some(r) = &self.random_drift {
            if !self.schedule.events.is_empty() {
                return Err(Error::Config("`random_drift` and an explicit schedule are exclusive".into()));
            }
            if r.concepts == 0 || r.kinds.is_empty() || r.rates.is_empty() || r.width == 0 {
                return Err(Error::Config("random drift needs concepts, kinds, rates and a width".into()));
            }
        }
        if self.feature_subsample == Some(0) {
            return Err(Error::Config("feature_subsample must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "kebab-case")]
pub enum FeatureValue<F> {
    Real(F),
    Category(usize),
    Missing,
}

impl<F: Real> FeatureValue<F> {
    pub fn as_real(&self) -> Option<F> {
        match *self {
            FeatureValue::Real(v) => Some(v),
            FeatureValue::Category(c) => Some(F::from_count(c)),
            FeatureValue::Missing => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, FeatureValue::Missing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "kebab-case")]
pub enum Label<F> {
    Class(usize),
    Value(F),
}

impl<F: Real> Label<F> {
    pub fn as_real(&self) -> F {
        match *self {
            Label::Class(c) => F::from_count(c),
            Label::Value(v) => v,
        }
    }

    pub fn class(&self) -> Option<usize> {
        match *self {
            Label::Class(c) => Some(c),
            Label::Value(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub intervened: Vec<NodeId>,
    pub missing: Vec<NodeId>,
    /// Diagnostic only.
    pub concept: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance<F> {
    pub t: u64,
    pub features: Vec<FeatureValue<F>>,
    pub label: Label<F>,
    pub meta: InstanceMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub t: u64,
    pub event: usize,
    pub description: String,
}

/// Half-open span of the stream governed by one concept id. Windowed events make
/// neighbouring spans overlap by the window length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptSpan {
    pub id: usize,
    pub start: u64,
    pub end: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "F: Real"))]
pub struct Sidecar<F> {
    pub seed: u64,
    pub config: GeneratorConfig<F>,
    pub columns: Vec<String>,
    /// Graph node behind each emitted column.
    pub emitted_nodes: Vec<NodeId>,
    pub graph: GraphSpec,
    pub schedule: DriftSchedule<F>,
    pub concepts: Vec<ConceptSpan>,
    pub classes: Option<usize>,
}

/// Concept spans implied by a schedule over a stream of `len` instances.
pub fn concept_spans<F: Real>(schedule: &DriftSchedule<F>, len: u64) -> Vec<ConceptSpan> {
    let mut spans = Vec::with_capacity(schedule.events.len() + 1);
    let mut start = 0;
    for (i, e) in schedule.events.iter().enumerate() {
        spans.push(ConceptSpan {
            id: i,
            start,
            end: if e.width == 1 { e.start } else { e.end() }.min(len).max(start),
        });
        start = e.start.min(len);
    }
    spans.push(ConceptSpan {
        id: schedule.events.len(),
        start,
        end: len,
    });
    spans
}

fn pick_distributional_action<F: Real, R: Rng + ?Sized>(
    concept: &Concept<F>,
    rng: &mut R,
) -> Option<Mechanism<F>> {
    let options: Vec<Mechanism<F>> = concept
        .graph
        .nodes()
        .filter_map(|n| match &concept.mappers[n.0] {
            NodeMapper::Root(_) => None,
            NodeMapper::Continuous(m) if m.kind == ContinuousKind::RandomMlp => {
                Some(Mechanism::ReinitRandomMlp { node: n })
            }
            NodeMapper::Continuous(_) => Some(Mechanism::RefitNewTargetFn { node: n, target: None }),
            NodeMapper::Categorical(m) if m.kind == CategoricalKind::Hyperplane => {
                (m.arity() >= 2).then_some(Mechanism::RotateHyperplane { node: Some(n), angle_degrees: None })
            }
            NodeMapper::Categorical(_) => Some(Mechanism::MovePrototypes { node: Some(n) }),
        })
        .collect();
    let target = concept.target();
    let on_target: Vec<&Mechanism<F>> = options.iter().filter(|m| m.node(target) == target).collect();
    if !on_target.is_empty() && rng.random::<bool>() {
        return on_target.choose(rng).map(|m| (*m).clone());
    }
    options.choose(rng).cloned()
}

fn root_shift<F: Real, R: Rng + ?Sized>(node: NodeId, rng: &mut R) -> Mechanism<F> {
    let mag = F::uniform(rng, F::one(), F::lit(3.0));
    let scales = if rng.random::<bool>() { mag } else { -mag };
    Mechanism::RootParams {
        node,
        change: RootChange::ShiftMean { scales },
    }
}

/// Materializes a random schedule for `concept`.
pub fn random_schedule<F: Real, R: Rng + ?Sized>(
    recipe: &RandomDrift,
    concept: &Concept<F>,
    dataset_size: u64,
    rng: &mut R,
) -> Result<DriftSchedule<F>> {
    let n_events = recipe.concepts.saturating_sub(1) as u64;
    if n_events == 0 {
        return Ok(DriftSchedule::default());
    }
    let spacing = dataset_size / (n_events + 1);
    if spacing < 2 {
        return Err(Error::Config("stream too short for the requested number of concepts".into()));
    }
    let classification = concept.n_classes().is_some();
    let roots = concept.graph.roots();
    let mut saved = vec![INITIAL_SNAPSHOT.to_string()];
    let mut events = Vec::new();
    for k in 1..=n_events {
        let name = format!("concept-{}", k - 1);
        let mut kind = *recipe.kinds.choose(rng).expect("validated non-empty");
        if kind == ShiftKind::Severe && !classification {
            kind = ShiftKind::Distributional;
        }
        let mut rate = *recipe.rates.choose(rng).expect("validated non-empty");
        let (actions, restore) = match kind {
            ShiftKind::Recurrent => (Vec::new(), saved.choose(rng).cloned()),
            ShiftKind::Severe => (vec![Mechanism::SwapClasses { classes: None }], None),
            ShiftKind::Local => (vec![root_shift(*roots.choose(rng).expect("graph has roots"), rng)], None),
            ShiftKind::Covariate => {
                let k = rng.random_range(1..=roots.len().min(2));
                let picked = index::sample(rng, roots.len(), k);
                (picked.into_iter().map(|i| root_shift(roots[i], rng)).collect(), None)
            }
            ShiftKind::Distributional => {
                let a = pick_distributional_action(concept, rng)
                    .ok_or_else(|| Error::Config("no mapper supports a distributional shift".into()))?;
                (vec![a], None)
            }
        };
        let incremental_ok = actions.iter().all(|a| match a {
            Mechanism::RefitNewTargetFn { node, .. } => matches!(
                &concept.mappers[node.0],
                NodeMapper::Continuous(m) if m.kind == ContinuousKind::SgdLinear
            ),
            Mechanism::SwapClasses { .. } | Mechanism::ChangeDistance { .. } => false,
            _ => true,
        });
        if rate == DriftRate::Incremental && (kind == ShiftKind::Recurrent || !incremental_ok) {
            rate = DriftRate::Gradual;
        }
        let width = match rate {
            DriftRate::Abrupt => 1,
            _ => recipe.width.min(spacing / 2).max(2),
        };
        events.push(ShiftSpec {
            kind,
            rate,
            start: k * spacing,
            width,
            actions,
            save_as: Some(name.clone()),
            restore,
        });
        saved.push(name);
    }
    DriftSchedule::new(events)
}

enum Active<F> {
    Gradual { start: u64, end: u64, old: Concept<F>, new: Concept<F> },
    Incremental(Box<IncrementalShift<F>>),
}

/// One stream. Each random consumer has its own substream of the run seed, so for
/// `t < t_start` a run with a schedule matches the same run without one.
pub struct StreamGenerator<F: Real> {
    seed: u64,
    config: GeneratorConfig<F>,
    schedule: DriftSchedule<F>,
    concept: Concept<F>,
    state: TemporalState<F>,
    emitted: Vec<NodeId>,
    policy: InterventionPolicy<F>,
    t: u64,
    next_event: usize,
    concept_id: usize,
    active: Option<Active<F>>,
    store: SnapshotStore<F>,
    trace: Vec<TraceEntry>,
    values_rng: StreamRng,
    interventions_rng: StreamRng,
    mask_rng: StreamRng,
    drift_rng: StreamRng,
}

impl<F: Real> StreamGenerator<F> {
    pub fn new(config: GeneratorConfig<F>, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut layout = substream(seed, Substream::Layout);
        let graph = match (&config.graph, &config.dag) {
            (Some(spec), _) => CausalGraph::try_from(spec.clone()).map_err(|e| Error::Config(e.to_string()))?,
            (None, Some(dag)) => build_dag(dag, &mut layout)?,
            (None, None) => unreachable!("validated"),
        };
        let features = graph.features();
        let emitted = match config.feature_subsample {
            Some(k) if k > features.len() => {
                return Err(Error::Config(format!(
                    "feature_subsample {k} exceeds the {} available features",
                    features.len()
                )))
            }
            Some(k) => {
                let mut picked: Vec<NodeId> = index::sample(&mut layout, features.len(), k)
                    .into_iter()
                    .map(|i| features[i])
                    .collect();
                picked.sort_unstable();
                picked
            }
            None => features,
        };
        let concept = init_concept(
            &graph,
            &config.concept,
            config.temporal,
            &mut substream(seed, Substream::Init),
        )?;
        let schedule = match &config.random_drift {
            Some(r) => random_schedule(r, &concept, config.dataset_size, &mut substream(seed, Substream::Schedule))?,
            None => config.schedule.clone(),
        };
        schedule.check(&concept)?;
        Self::assemble(config, seed, concept, schedule, emitted)
    }

    /// Runs a prepared concept. `emitted` lists the feature nodes to emit, in order.
    pub fn from_concept(
        config: GeneratorConfig<F>,
        seed: u64,
        concept: Concept<F>,
        emitted: Vec<NodeId>,
    ) -> Result<Self> {
        let schedule = config.schedule.clone();
        schedule.validate()?;
        schedule.check(&concept)?;
        Self::assemble(config, seed, concept, schedule, emitted)
    }

    fn assemble(
        config: GeneratorConfig<F>,
        seed: u64,
        concept: Concept<F>,
        schedule: DriftSchedule<F>,
        emitted: Vec<NodeId>,
    ) -> Result<Self> {
        if emitted.iter().any(|n| n.0 >= concept.graph.len() || *n == concept.target()) {
            return Err(Error::Config("emitted columns must be non-target graph nodes".into()));
        }
        let state = concept.initial_state();
        let mut store = SnapshotStore::default();
        store.save(INITIAL_SNAPSHOT, snapshot(&concept, &state), 0);
        Ok(StreamGenerator {
            seed,
            policy: config.intervention_policy(),
            config,
            schedule,
            concept,
            state,
            emitted,
            t: 0,
            next_event: 0,
            concept_id: 0,
            active: None,
            store,
            trace: Vec::new(),
            values_rng: substream(seed, Substream::Values),
            interventions_rng: substream(seed, Substream::Interventions),
            mask_rng: substream(seed, Substream::Mask),
            drift_rng: substream(seed, Substream::Drift),
        })
    }

    pub fn concept(&self) -> &Concept<F> {
        &self.concept
    }

    pub fn schedule(&self) -> &DriftSchedule<F> {
        &self.schedule
    }

    pub fn emitted_nodes(&self) -> &[NodeId] {
        &self.emitted
    }

    pub fn columns(&self) -> Vec<String> {
        (1..=self.emitted.len()).map(|i| format!("x{i}")).collect()
    }

    pub fn task(&self) -> Task {
        match self.concept.graph.kind(self.concept.target()) {
            NodeKind::Categorical => Task::Classification,
            NodeKind::Continuous => Task::Regression,
        }
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    pub fn position(&self) -> u64 {
        self.t
    }

    pub fn len(&self) -> u64 {
        self.config.dataset_size
    }

    pub fn is_empty(&self) -> bool {
        self.config.dataset_size == 0
    }

    pub fn sidecar(&self) -> Sidecar<F> {
        Sidecar {
            seed: self.seed,
            config: self.config.clone(),
            columns: self.columns(),
            emitted_nodes: self.emitted.clone(),
            graph: self.concept.graph.clone().into(),
            schedule: self.schedule.clone(),
            concepts: concept_spans(&self.schedule, self.config.dataset_size),
            classes: self.concept.n_classes(),
        }
    }

    fn start_event(&mut self, index: usize) -> Result<()> {
        let spec = self.schedule.events[index].clone();
        if let Some(name) = &spec.save_as {
            self.store
                .save(name, snapshot(&self.concept, &self.state), self.concept_id);
        }
        self.concept_id += 1;
        let t = self.t;
        match spec.rate {
            DriftRate::Abrupt => {
                if let Some(name) = &spec.restore {
                    apply_recurrent(&mut self.concept, &self.store, name)?;
                } else {
                    apply_abrupt(&mut self.concept, &spec, &mut self.drift_rng)?;
                }
            }
            DriftRate::Gradual => {
                let mut new = self.concept.clone();
                if let Some(name) = &spec.restore {
                    apply_recurrent(&mut new, &self.store, name)?;
                } else {
                    apply_abrupt(&mut new, &spec, &mut self.drift_rng)?;
                }
                self.active = Some(Active::Gradual {
                    start: spec.start,
                    end: spec.end(),
                    old: self.concept.clone(),
                    new,
                });
            }
            DriftRate::Incremental => {
                let plan = IncrementalShift::plan(&self.concept, &spec, &mut self.drift_rng)?;
                self.active = Some(Active::Incremental(Box::new(plan)));
            }
        }
        self.trace.push(TraceEntry {
            t,
            event: index,
            description: spec.describe(),
        });
        Ok(())
    }

    fn finish_window(&mut self) {
        let done = match &self.active {
            Some(Active::Gradual { end, .. }) => self.t >= *end,
            Some(Active::Incremental(p)) => self.t >= p.start + p.width,
            None => false,
        };
        if done {
            if let Some(Active::Gradual { new, .. }) = self.active.take() {
                self.concept = new;
            }
        }
    }

    /// Produces instance `t` and advances the stream, or `None` once exhausted.
    pub fn next_instance(&mut self) -> Result<Option<Instance<F>>> {
        if self.t >= self.config.dataset_size {
            return Ok(None);
        }
        self.finish_window();
        while self.next_event < self.schedule.events.len() && self.schedule.events[self.next_event].start <= self.t {
            let i = self.next_event;
            self.next_event += 1;
            if self.schedule.events[i].start == self.t {
                self.start_event(i)?;
            }
        }
        let t = self.t;
        let missing = self.draw_mask();
        let mut concept_id = self.concept_id;
        let chosen = match &mut self.active {
            Some(Active::Gradual { start, end, old, new }) => {
                match gradual_selector::<F, _>(t, *start, *end - *start, &mut self.drift_rng)? {
                    Side::Old => {
                        concept_id -= 1;
                        &*old
                    }
                    Side::New => &*new,
                }
            }
            Some(Active::Incremental(plan)) => {
                plan.advance(&mut self.concept, t)?;
                &self.concept
            }
            None => &self.concept,
        };
        let draws = draw_interventions(&self.policy, chosen, &mut self.interventions_rng);
        let mut forced = vec![None; chosen.graph.len()];
        for (n, v) in &draws {
            forced[n.0] = Some(*v);
        }
        let values = chosen.step(&mut self.state, &forced, &mut self.values_rng)?;
        let target = chosen.target();
        let label = match chosen.graph.kind(target) {
            NodeKind::Categorical => Label::Class(values[target.0].to_usize().unwrap_or(0)),
            NodeKind::Continuous => Label::Value(values[target.0]),
        };
        let features = self
            .emitted
            .iter()
            .map(|n| {
                if missing.contains(n) {
                    FeatureValue::Missing
                } else {
                    match chosen.graph.kind(*n) {
                        NodeKind::Categorical => FeatureValue::Category(values[n.0].to_usize().unwrap_or(0)),
                        NodeKind::Continuous => FeatureValue::Real(values[n.0]),
                    }
                }
            })
            .collect();
        self.t += 1;
        Ok(Some(Instance {
            t,
            features,
            label,
            meta: InstanceMeta {
                intervened: draws.into_iter().map(|(n, _)| n).collect(),
                missing,
                concept: concept_id,
            },
        }))
    }

    fn draw_mask(&mut self) -> Vec<NodeId> {
        let rng = &mut self.mask_rng;
        if F::unit(rng) >= self.config.p_m || self.emitted.is_empty() {
            return Vec::new();
        }
        let k = rng
            .random_range(MISSING_NODES.0..=MISSING_NODES.1)
            .min(self.emitted.len());
        let mut picked: Vec<NodeId> = index::sample(rng, self.emitted.len(), k)
            .into_iter()
            .map(|i| self.emitted[i])
            .collect();
        picked.sort_unstable();
        picked
    }
}

impl<F: Real> Iterator for StreamGenerator<F> {
    type Item = Result<Instance<F>>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_instance().transpose()
    }
}

/// Runs a whole stream into memory.
pub fn generate<F: Real>(config: GeneratorConfig<F>, seed: u64) -> Result<Vec<Instance<F>>> {
    StreamGenerator::new(config, seed)?.collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: u64) -> GeneratorConfig<f64> {
        GeneratorConfig::new(n, DagParams::new(5, 2, 1, 3))
    }

    #[test]
    fn empty_stream() {
        assert!(generate(small(0), 1).unwrap().is_empty());
    }

    #[test]
    fn plain_stream_is_finite_and_complete() {
        let rows = generate(small(300), 2).unwrap();
        assert_eq!(rows.len(), 300);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.t, i as u64);
            assert_eq!(r.features.len(), 5);
            assert!(r.features.iter().all(|f| f.as_real().unwrap().is_finite()));
            assert!(r.meta.intervened.is_empty() && r.meta.missing.is_empty());
            assert!(r.label.class().unwrap() < 2);
        }
    }

    #[test]
    fn masking_keeps_labels() {
        let base = generate(small(500), 3).unwrap();
        let mut cfg = small(500);
        cfg.p_m = 1.0;
        let masked = generate(cfg, 3).unwrap();
        for (a, b) in base.iter().zip(&masked) {
            assert_eq!(a.label, b.label);
            let k = b.features.iter().filter(|f| f.is_missing()).count();
            assert!((1..=3).contains(&k));
            assert_eq!(k, b.meta.missing.len());
        }
    }

    #[test]
    fn subsample_picks_fixed_columns() {
        let mut cfg = GeneratorConfig::<f64>::new(50, DagParams::new(30, 5, 1, 3));
        cfg.feature_subsample = Some(7);
        let g = StreamGenerator::new(cfg.clone(), 9).unwrap();
        assert_eq!(g.emitted_nodes().len(), 7);
        assert!(g.emitted_nodes().iter().all(|n| *n != g.concept().target()));
        let rows: Vec<_> = g.collect::<Result<_>>().unwrap();
        assert!(rows.iter().all(|r| r.features.len() == 7));
        cfg.feature_subsample = Some(31);
        assert!(StreamGenerator::new(cfg, 9).is_err());
    }

    #[test]
    fn random_schedule_is_valid_and_reproducible() {
        let mut cfg = GeneratorConfig::<f64>::new(2000, DagParams::new(8, 3, 1, 3));
        cfg.random_drift = Some(RandomDrift {
            concepts: 5,
            ..RandomDrift::default()
        });
        let a = StreamGenerator::new(cfg.clone(), 4).unwrap();
        let b = StreamGenerator::new(cfg, 4).unwrap();
        assert_eq!(a.schedule().events.len(), 4);
        assert_eq!(a.schedule(), b.schedule());
        let rows: Vec<_> = a.collect::<Result<_>>().unwrap();
        assert_eq!(rows.len(), 2000);
    }

    #[test]
    fn spans_follow_events() {
        let spec = |start, width, rate| ShiftSpec::<f64> {
            kind: ShiftKind::Severe,
            rate,
            start,
            width,
            actions: vec![Mechanism::SwapClasses { classes: None }],
            save_as: None,
            restore: None,
        };
        let s = DriftSchedule::new(vec![spec(10, 1, DriftRate::Abrupt), spec(20, 5, DriftRate::Gradual)]).unwrap();
        let spans = concept_spans(&s, 40);
        assert_eq!(
            spans,
            vec![
                ConceptSpan { id: 0, start: 0, end: 10 },
                ConceptSpan { id: 1, start: 10, end: 25 },
                ConceptSpan { id: 2, start: 20, end: 40 },
            ]
        );
    }
}
