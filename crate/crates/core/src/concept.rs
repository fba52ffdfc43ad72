//! A graph bound to concrete mappers, root distributions and temporal parameters.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CausalGraph, NodeId, NodeKind};
use crate::mappers::target::DEFAULT_NOISE_SCALE;
use crate::mappers::{
    fit_continuous_mapper, init_categorical_mapper, init_random_mlp, CategoricalKind,
    CategoricalMapper, CentroidRange, ContinuousKind, ContinuousMapper, ParentStats,
    RootDistribution, RootKind, RootRanges, Standardizer, TargetFunction, TargetKind,
};
use crate::scalar::{mean_std, Real};
use crate::temporal::{ar_noise_step, root_value_step, TemporalParams, TemporalState};

pub const FIT_SAMPLES: usize = 1024;
/// Centroid redraws allowed while looking for a balanced categorical mapper.
pub const BALANCE_ATTEMPTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "kebab-case")]
pub enum NodeMapper<F> {
    Root(RootDistribution<F>),
    Continuous(ContinuousMapper<F>),
    Categorical(CategoricalMapper<F>),
}

impl<F: Real> NodeMapper<F> {
    pub fn describe(&self) -> String {
        match self {
            NodeMapper::Root(RootDistribution::Normal { mean, variance }) => {
                format!("normal(mean={mean:.4}, variance={variance:.4})")
            }
            NodeMapper::Root(RootDistribution::Uniform { low, high }) => {
                format!("uniform(low={low:.4}, high={high:.4})")
            }
            NodeMapper::Continuous(m) => match &m.target_fn {
                Some(f) => format!("{} fitted to {}", m.kind.name(), f.kind().name()),
                None => m.kind.name().to_string(),
            },
            NodeMapper::Categorical(m) => format!("{} mapper, {} classes", m.kind.name(), m.n_classes),
        }
    }
}

/// Location and spread of a node's output on the fit sample. Scales AR noise and
/// centers intervention draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeScale<F> {
    pub center: F,
    pub scale: F,
}

/// Per-node override of the random mapper assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mapper", rename_all = "kebab-case", deny_unknown_fields)]
#[serde(bound(deserialize = "F: Real"))]
pub enum NodePin<F> {
    Root {
        #[serde(default)]
        kind: Option<RootKind>,
        #[serde(default)]
        distribution: Option<RootDistribution<F>>,
    },
    Continuous {
        kind: ContinuousKind,
        #[serde(default)]
        target: Option<TargetKind>,
    },
    Categorical {
        kind: CategoricalKind,
        #[serde(default)]
        classes: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "F: Real"))]
pub struct ConceptSettings<F> {
    /// Classes of the target node in classification tasks.
    pub n_classes: usize,
    /// Inclusive class-count range for categorical feature nodes.
    pub feature_classes: (usize, usize),
    pub root_ranges: RootRanges<F>,
    pub continuous_kinds: Vec<ContinuousKind>,
    pub categorical_kinds: Vec<CategoricalKind>,
    pub target_functions: Vec<TargetKind>,
    /// Relative amplitude of the additive noise in fitted target functions.
    pub noise_scale: F,
    pub centroids_per_class: CentroidRange,
    /// Centroid mappers are redrawn until their rarest class covers at least
    /// `class_balance / n_classes` of the fit sample (best of the attempts otherwise).
    pub class_balance: F,
    pub fit_samples: usize,
    /// Keyed by node index.
    pub pins: BTreeMap<usize, NodePin<F>>,
}

impl<F: Real> Default for ConceptSettings<F> {
    fn default() -> Self {
        ConceptSettings {
            n_classes: 2,
            feature_classes: (2, 4),
            root_ranges: RootRanges::default(),
            continuous_kinds: ContinuousKind::ALL.to_vec(),
            categorical_kinds: vec![
                CategoricalKind::Prototype,
                CategoricalKind::GaussianPrototype,
                CategoricalKind::RandomRbf,
            ],
            target_functions: TargetKind::ALL.to_vec(),
            noise_scale: F::lit(DEFAULT_NOISE_SCALE),
            centroids_per_class: CentroidRange::default(),
            class_balance: F::lit(0.5),
            fit_samples: FIT_SAMPLES,
            pins: BTreeMap::new(),
        }
    }
}

impl<F: Real> ConceptSettings<F> {
    pub fn validate(&self, graph: &CausalGraph) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::Config("n_classes must be at least 2".into()));
        }
        if self.feature_classes.0 < 2 || self.feature_classes.1 < self.feature_classes.0 {
            return Err(Error::Config("feature_classes must satisfy 2 <= min <= max".into()));
        }
        if self.continuous_kinds.is_empty() || self.categorical_kinds.is_empty() {
            return Err(Error::Config("mapper kind menus must not be empty".into()));
        }
        if self.target_functions.is_empty() {
            return Err(Error::Config("target function menu must not be empty".into()));
        }
        if !(self.noise_scale >= F::zero()) {
            return Err(Error::Config("noise_scale must be non-negative".into()));
        }
        if !(self.class_balance >= F::zero() && self.class_balance <= F::one()) {
            return Err(Error::Config("class_balance must lie in [0, 1]".into()));
        }
        if self.fit_samples < 2 {
            return Err(Error::Config("fit_samples must be at least 2".into()));
        }
        for (&i, pin) in &self.pins {
            if i >= graph.len() {
                return Err(Error::Config(format!("pin for unknown node {i}")));
            }
            let node = NodeId(i);
            let ok = match pin {
                NodePin::Root { .. } => graph.is_root(node),
                NodePin::Continuous { .. } => {
                    !graph.is_root(node) && graph.kind(node) == NodeKind::Continuous
                }
                NodePin::Categorical { kind, classes } => {
                    if let Some(c) = classes {
                        if *c < 2 || (node == graph.target() && *c != self.n_classes) {
                            return Err(Error::Config(format!("invalid class count for node {i}")));
                        }
                    }
                    if *kind == CategoricalKind::Hyperplane
                        && node == graph.target()
                        && self.n_classes != 2
                    {
                        return Err(Error::Config("hyperplane target needs n_classes = 2".into()));
                    }
                    graph.kind(node) == NodeKind::Categorical
                }
            };
            if !ok {
                return Err(Error::Config(format!("pin does not match the role of node {i}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Concept<F> {
    pub graph: CausalGraph,
    /// Indexed by node.
    pub mappers: Vec<NodeMapper<F>>,
    pub scales: Vec<NodeScale<F>>,
    pub temporal: TemporalParams<F>,
    /// Applied to the target's class output; empty for regression.
    pub class_permutation: Vec<usize>,
    pub class_balance: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConceptSnapshot<F> {
    pub concept: Concept<F>,
    pub state: TemporalState<F>,
}

pub fn snapshot<F: Real>(concept: &Concept<F>, state: &TemporalState<F>) -> ConceptSnapshot<F> {
    ConceptSnapshot {
        concept: concept.clone(),
        state: state.clone(),
    }
}

fn column_scale<F: Real>(col: &[F]) -> NodeScale<F> {
    let (center, s) = mean_std(col);
    NodeScale {
        center,
        scale: if s > F::epsilon().sqrt() { s } else { F::one() },
    }
}

fn gather<F: Real>(cols: &[Vec<F>], parents: &[NodeId], row: usize) -> Vec<F> {
    parents.iter().map(|p| cols[p.0][row]).collect()
}

pub(crate) fn parent_rows<F: Real>(cols: &[Vec<F>], parents: &[NodeId]) -> Vec<Vec<F>> {
    let n = cols.get(parents[0].0).map_or(0, Vec::len);
    (0..n).map(|r| gather(cols, parents, r)).collect()
}

/// Picks a target function kind, avoiding `exclude` when the menu allows it.
pub(crate) fn pick_target_kind<R: Rng + ?Sized>(
    menu: &[TargetKind],
    exclude: Option<TargetKind>,
    rng: &mut R,
) -> TargetKind {
    let filtered: Vec<TargetKind> = menu.iter().copied().filter(|k| Some(*k) != exclude).collect();
    let pool = if filtered.is_empty() { menu } else { &filtered };
    *pool.choose(rng).expect("non-empty target menu")
}

struct NodeInit<F> {
    mapper: NodeMapper<F>,
    column: Vec<F>,
}

/// Share of the rarest class among the mapper's outputs on `rows`.
pub fn min_class_share<F: Real>(mapper: &CategoricalMapper<F>, rows: &[Vec<F>]) -> Result<F> {
    let mut counts = vec![0usize; mapper.n_classes];
    for r in rows {
        counts[mapper.predict(r)?] += 1;
    }
    let min = counts.iter().copied().min().unwrap_or(0);
    Ok(F::from_count(min) / F::from_count(rows.len().max(1)))
}

/// Redraws centroid positions until the rarest class reaches `balance / n_classes`,
/// keeping the best candidate seen. Hyperplane mappers are left alone.
pub(crate) fn improve_balance<F: Real, R: Rng + ?Sized>(
    mapper: &mut CategoricalMapper<F>,
    stats: &[ParentStats<F>],
    rows: &[Vec<F>],
    balance: F,
    rng: &mut R,
) -> Result<()> {
    if !mapper.kind.uses_centroids() || balance <= F::zero() {
        return Ok(());
    }
    let want = balance / F::from_count(mapper.n_classes);
    let mut best_share = min_class_share(mapper, rows)?;
    let mut best = mapper.positions();
    for _ in 0..BALANCE_ATTEMPTS {
        if best_share >= want {
            break;
        }
        let cand = mapper.draw_positions(stats, rng)?;
        mapper.set_positions(cand.clone());
        let share = min_class_share(mapper, rows)?;
        if share > best_share {
            best_share = share;
            best = cand;
        }
    }
    mapper.set_positions(best);
    Ok(())
}

fn init_inner<F: Real, R: Rng + ?Sized>(
    graph: &CausalGraph,
    node: NodeId,
    settings: &ConceptSettings<F>,
    rows: &[Vec<F>],
    rng: &mut R,
) -> Result<NodeInit<F>> {
    let pin = settings.pins.get(&node.0);
    let arity = graph.parents(node).len();
    match graph.kind(node) {
        NodeKind::Continuous => {
            let (kind, fn_kind) = match pin {
                Some(NodePin::Continuous { kind, target }) => (*kind, *target),
                _ => (*settings.continuous_kinds.choose(rng).expect("non-empty"), None),
            };
            let mapper = if kind == ContinuousKind::RandomMlp {
                let mut m = init_random_mlp(arity, rng)?;
                m.input = Standardizer::fit(rows)?;
                m
            } else {
                let fk = fn_kind.unwrap_or_else(|| pick_target_kind(&settings.target_functions, None, rng));
                let f = TargetFunction::random(fk, arity, settings.noise_scale, rng)?;
                fit_continuous_mapper(kind, rows, &f, rng)?
            };
            let column = rows.iter().map(|r| mapper.predict(r)).collect::<Result<Vec<F>>>()?;
            Ok(NodeInit {
                mapper: NodeMapper::Continuous(mapper),
                column,
            })
        }
        NodeKind::Categorical => {
            let is_target = node == graph.target();
            let (kind, classes) = match pin {
                Some(NodePin::Categorical { kind, classes }) => (*kind, *classes),
                _ => {
                    let n_classes_hint = if is_target { Some(settings.n_classes) } else { None };
                    let menu: Vec<CategoricalKind> = settings
                        .categorical_kinds
                        .iter()
                        .copied()
                        .filter(|k| *k != CategoricalKind::Hyperplane || n_classes_hint.is_none_or(|c| c == 2))
                        .collect();
                    let kind = *menu
                        .choose(rng)
                        .ok_or_else(|| Error::Config("no categorical mapper fits the class count".into()))?;
                    (kind, None)
                }
            };
            let n_classes = if is_target {
                settings.n_classes
            } else if let Some(c) = classes {
                c
            } else if kind == CategoricalKind::Hyperplane {
                2
            } else {
                rng.random_range(settings.feature_classes.0..=settings.feature_classes.1)
            };
            let stats = ParentStats::from_samples(rows)?;
            let mut mapper = init_categorical_mapper(kind, &stats, n_classes, settings.centroids_per_class, rng)?;
            improve_balance(&mut mapper, &stats, rows, settings.class_balance, rng)?;
            let column = rows
                .iter()
                .map(|r| mapper.predict(r).map(F::from_count))
                .collect::<Result<Vec<F>>>()?;
            Ok(NodeInit {
                mapper: NodeMapper::Categorical(mapper),
                column,
            })
        }
    }
}

/// Walks the graph in topological order, drawing root distributions and fitting each
/// inner mapper on `settings.fit_samples` noise-free ancestral samples.
pub fn init_concept<F: Real, R: Rng + ?Sized>(
    graph: &CausalGraph,
    settings: &ConceptSettings<F>,
    temporal: TemporalParams<F>,
    rng: &mut R,
) -> Result<Concept<F>> {
    settings.validate(graph)?;
    temporal.validate()?;
    if graph.roots().len() == graph.len() {
        return Err(Error::Config("the graph has no inner node to act as target".into()));
    }
    let n = settings.fit_samples;
    let len = graph.len();
    let mut cols: Vec<Vec<F>> = vec![Vec::new(); len];
    let mut mappers: Vec<Option<NodeMapper<F>>> = vec![None; len];
    let mut scales = vec![
        NodeScale {
            center: F::zero(),
            scale: F::one()
        };
        len
    ];
    for &node in graph.topo_order() {
        if graph.is_root(node) {
            let dist = match settings.pins.get(&node.0) {
                Some(NodePin::Root {
                    distribution: Some(d),
                    ..
                }) => {
                    d.validate()?;
                    d.clone()
                }
                Some(NodePin::Root { kind: Some(k), .. }) => {
                    RootDistribution::random(*k, &settings.root_ranges, rng)
                }
                _ => {
                    let k = if rng.random::<bool>() { RootKind::Normal } else { RootKind::Uniform };
                    RootDistribution::random(k, &settings.root_ranges, rng)
                }
            };
            dist.validate()?;
            cols[node.0] = (0..n).map(|_| dist.sample(rng)).collect();
            scales[node.0] = NodeScale {
                center: dist.center(),
                scale: dist.std_dev(),
            };
            mappers[node.0] = Some(NodeMapper::Root(dist));
            continue;
        }
        let rows = parent_rows(&cols, graph.parents(node));
        let init = match init_inner(graph, node, settings, &rows, rng) {
            Err(Error::FitFailed(_)) | Err(Error::Degenerate(_)) => {
                init_inner(graph, node, settings, &rows, rng)?
            }
            other => other?,
        };
        scales[node.0] = column_scale(&init.column);
        cols[node.0] = init.column;
        mappers[node.0] = Some(init.mapper);
    }
    let class_permutation = match graph.kind(graph.target()) {
        NodeKind::Categorical => (0..settings.n_classes).collect(),
        NodeKind::Continuous => Vec::new(),
    };
    Ok(Concept {
        graph: graph.clone(),
        mappers: mappers.into_iter().map(|m| m.expect("every node visited")).collect(),
        scales,
        temporal,
        class_permutation,
        class_balance: settings.class_balance,
    })
}

impl<F: Real> Concept<F> {
    pub fn target(&self) -> NodeId {
        self.graph.target()
    }

    pub fn target_mapper(&self) -> Option<&CategoricalMapper<F>> {
        match &self.mappers[self.target().0] {
            NodeMapper::Categorical(m) => Some(m),
            _ => None,
        }
    }

    /// Number of classes a node can emit, or `None` for continuous nodes.
    pub fn classes_of(&self, node: NodeId) -> Option<usize> {
        match &self.mappers[node.0] {
            NodeMapper::Categorical(m) => Some(m.n_classes),
            _ => None,
        }
    }

    pub fn n_classes(&self) -> Option<usize> {
        self.classes_of(self.target())
    }

    /// Noise-free output of an inner node given its parents' values.
    pub fn node_output(&self, node: NodeId, parents: &[F]) -> Result<F> {
        match &self.mappers[node.0] {
            NodeMapper::Root(_) => Err(Error::param(format!("node {node} is a root"))),
            NodeMapper::Continuous(m) => m.predict(parents),
            NodeMapper::Categorical(m) => {
                let mut c = m.predict(parents)?;
                if node == self.target() {
                    c = self.class_permutation[c];
                }
                Ok(F::from_count(c))
            }
        }
    }

    /// Target class for the given target-parent values, after the class permutation.
    pub fn label_for_parents(&self, parents: &[F]) -> Result<usize> {
        let m = self
            .target_mapper()
            .ok_or_else(|| Error::param("the target is not categorical"))?;
        Ok(self.class_permutation[m.predict(parents)?])
    }

    /// Noise-free label from a map of node values; every target parent must be present.
    pub fn deterministic_label(&self, values: &BTreeMap<NodeId, F>) -> Result<usize> {
        let parents = self
            .graph
            .parents(self.target())
            .iter()
            .map(|p| values.get(p).copied().ok_or(Error::MissingValue(p.0)))
            .collect::<Result<Vec<F>>>()?;
        self.label_for_parents(&parents)
    }

    /// `n` noise-free ancestral samples, returned column-wise (one vector per node).
    pub fn simulate_table<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Vec<F>>> {
        let mut cols: Vec<Vec<F>> = vec![Vec::new(); self.graph.len()];
        for &node in self.graph.topo_order() {
            cols[node.0] = match &self.mappers[node.0] {
                NodeMapper::Root(d) => (0..n).map(|_| d.sample(rng)).collect(),
                _ => {
                    let ps = self.graph.parents(node);
                    (0..n)
                        .map(|r| self.node_output(node, &gather(&cols, ps, r)))
                        .collect::<Result<Vec<F>>>()?
                }
            };
        }
        Ok(cols)
    }

    /// Parent rows of `node` from a fresh simulation.
    pub fn parent_sample<R: Rng + ?Sized>(
        &self,
        node: NodeId,
        n: usize,
        rng: &mut R,
    ) -> Result<Vec<Vec<F>>> {
        let cols = self.simulate_table(n, rng)?;
        Ok(parent_rows(&cols, self.graph.parents(node)))
    }

    pub fn initial_state(&self) -> TemporalState<F> {
        TemporalState::new(&self.scales.iter().map(|s| s.center).collect::<Vec<_>>())
    }

    /// Produces one row of node values, advancing `state`.
    ///
    /// Every node advances its own dynamics even when `forced` overrides its output, so
    /// the number of draws from `rng` depends only on the graph.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &mut TemporalState<F>,
        forced: &[Option<F>],
        rng: &mut R,
    ) -> Result<Vec<F>> {
        let mut values = vec![F::zero(); self.graph.len()];
        let p = &self.temporal;
        for &node in self.graph.topo_order() {
            let i = node.0;
            let scale = self.scales[i].scale;
            let natural = match &self.mappers[i] {
                NodeMapper::Root(d) => root_value_step(&mut state.nodes[i], d, p, scale, rng),
                NodeMapper::Continuous(m) => {
                    let parents: Vec<F> = self.graph.parents(node).iter().map(|q| values[q.0]).collect();
                    let det = m.predict(&parents)?;
                    let entry = &mut state.nodes[i];
                    entry.noise = ar_noise_step(entry.noise, p, scale, rng);
                    entry.value = det + entry.noise;
                    entry.value
                }
                NodeMapper::Categorical(_) => {
                    let parents: Vec<F> = self.graph.parents(node).iter().map(|q| values[q.0]).collect();
                    let v = self.node_output(node, &parents)?;
                    state.nodes[i].value = v;
                    v
                }
            };
            values[i] = forced.get(i).copied().flatten().unwrap_or(natural);
        }
        Ok(values)
    }

    /// Axis-aligned grid over the target parents' simulated range, `per_axis` points each.
    pub fn target_parent_grid<R: Rng + ?Sized>(
        &self,
        per_axis: usize,
        rng: &mut R,
    ) -> Result<Vec<Vec<F>>> {
        let rows = self.parent_sample(self.target(), FIT_SAMPLES, rng)?;
        let stats = ParentStats::from_samples(&rows)?;
        let lo: Vec<F> = stats.iter().map(|s| s.min).collect();
        let hi: Vec<F> = stats.iter().map(|s| s.max).collect();
        Ok(grid(&lo, &hi, per_axis))
    }

    /// Labels for each grid row.
    pub fn label_grid(&self, grid: &[Vec<F>]) -> Result<Vec<usize>> {
        grid.iter().map(|r| self.label_for_parents(r)).collect()
    }
}

/// Cartesian grid with `per_axis` evenly spaced points between `lo` and `hi` per axis.
pub fn grid<F: Real>(lo: &[F], hi: &[F], per_axis: usize) -> Vec<Vec<F>> {
    let axes: Vec<Vec<F>> = lo
        .iter()
        .zip(hi)
        .map(|(&a, &b)| {
            if per_axis <= 1 {
                vec![(a + b) / F::lit(2.0)]
            } else {
                (0..per_axis)
                    .map(|k| a + (b - a) * F::from_count(k) / F::from_count(per_axis - 1))
                    .collect()
            }
        })
        .collect();
    let mut out: Vec<Vec<F>> = vec![Vec::new()];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut r = prefix.clone();
                    r.push(v);
                    r
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_dag, DagParams};
    use crate::rng::seeded;

    fn small_graph() -> CausalGraph {
        // 0, 1 roots; 2 = f(0, 1); 3 = target f(1, 2)
        CausalGraph::from_parts(
            vec![vec![], vec![], vec![NodeId(0), NodeId(1)], vec![NodeId(1), NodeId(2)]],
            vec![
                NodeKind::Continuous,
                NodeKind::Continuous,
                NodeKind::Continuous,
                NodeKind::Categorical,
            ],
            NodeId(3),
        )
        .unwrap()
    }

    #[test]
    fn init_is_deterministic() {
        let g = small_graph();
        let s = ConceptSettings::<f64>::default();
        let a = init_concept(&g, &s, TemporalParams::default(), &mut seeded(4)).unwrap();
        let b = init_concept(&g, &s, TemporalParams::default(), &mut seeded(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.class_permutation, vec![0, 1]);
    }

    #[test]
    fn pins_are_honored() {
        let g = small_graph();
        let mut s = ConceptSettings::<f64>::default();
        s.n_classes = 3;
        s.pins.insert(0, NodePin::Root { kind: Some(RootKind::Uniform), distribution: None });
        s.pins.insert(2, NodePin::Continuous { kind: ContinuousKind::RegressionTree, target: Some(TargetKind::Step) });
        s.pins.insert(3, NodePin::Categorical { kind: CategoricalKind::GaussianPrototype, classes: None });
        let c = init_concept(&g, &s, TemporalParams::default(), &mut seeded(1)).unwrap();
        assert!(matches!(c.mappers[0], NodeMapper::Root(RootDistribution::Uniform { .. })));
        match &c.mappers[2] {
            NodeMapper::Continuous(m) => {
                assert_eq!(m.kind, ContinuousKind::RegressionTree);
                assert_eq!(m.target_fn.as_ref().unwrap().kind(), TargetKind::Step);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(c.n_classes(), Some(3));
        assert_eq!(c.target_mapper().unwrap().kind, CategoricalKind::GaussianPrototype);
    }

    #[test]
    fn mismatched_pin_rejected() {
        let g = small_graph();
        let mut s = ConceptSettings::<f64>::default();
        s.pins.insert(2, NodePin::Root { kind: None, distribution: None });
        assert!(init_concept(&g, &s, TemporalParams::default(), &mut seeded(1)).is_err());
        let mut s = ConceptSettings::<f64>::default();
        s.n_classes = 3;
        s.pins.insert(3, NodePin::Categorical { kind: CategoricalKind::Hyperplane, classes: None });
        assert!(init_concept(&g, &s, TemporalParams::default(), &mut seeded(1)).is_err());
    }

    #[test]
    fn snapshot_is_isolated() {
        let g = small_graph();
        let mut c =
            init_concept(&g, &ConceptSettings::<f64>::default(), TemporalParams::default(), &mut seeded(2)).unwrap();
        let state = c.initial_state();
        let snap = snapshot(&c, &state);
        c.mappers[0] = NodeMapper::Root(RootDistribution::normal(123.0, 1.0).unwrap());
        assert_ne!(snap.concept.mappers[0], c.mappers[0]);
        let restored = snap.concept.clone();
        assert_eq!(snapshot(&restored, &state), snap);
        let json = serde_json::to_string(&snap).unwrap();
        let back: ConceptSnapshot<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, snap);
    }

    #[test]
    fn permutation_swaps_deterministic_labels() {
        let g = small_graph();
        let mut c =
            init_concept(&g, &ConceptSettings::<f64>::default(), TemporalParams::default(), &mut seeded(5)).unwrap();
        let grid = c.target_parent_grid(30, &mut seeded(6)).unwrap();
        let before = c.label_grid(&grid).unwrap();
        c.class_permutation = vec![1, 0];
        let after = c.label_grid(&grid).unwrap();
        assert!(before.iter().zip(&after).all(|(a, b)| *a == 1 - *b));
        let mut values = BTreeMap::new();
        values.insert(NodeId(1), grid[0][0]);
        assert!(matches!(c.deterministic_label(&values), Err(Error::MissingValue(2))));
        values.insert(NodeId(2), grid[0][1]);
        assert_eq!(c.deterministic_label(&values).unwrap(), after[0]);
    }

    #[test]
    fn step_respects_forced_values_and_stays_finite() {
        let g = build_dag(&DagParams::new(8, 2, 1, 3), &mut seeded(3)).unwrap();
        let c = init_concept(&g, &ConceptSettings::<f64>::default(), TemporalParams::default(), &mut seeded(3))
            .unwrap();
        let mut state = c.initial_state();
        let mut rng = seeded(9);
        let mut forced = vec![None; g.len()];
        forced[0] = Some(42.0);
        for _ in 0..500 {
            let v = c.step(&mut state, &forced, &mut rng).unwrap();
            assert_eq!(v[0], 42.0);
            assert!(v.iter().all(|x| x.is_finite()));
        }
        assert_ne!(state.nodes[0].value, 42.0);
    }

    #[test]
    fn grid_shape() {
        let g = grid(&[0.0_f64, 0.0], &[1.0, 2.0], 3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], vec![0.0, 0.0]);
        assert_eq!(g[8], vec![1.0, 2.0]);
    }

    #[test]
    fn works_in_single_precision() {
        let g = small_graph();
        let c = init_concept(&g, &ConceptSettings::<f32>::default(), TemporalParams::default(), &mut seeded(2))
            .unwrap();
        let mut state = c.initial_state();
        let v = c.step(&mut state, &[], &mut seeded(1)).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
    }
}
