//! Shift scheduling and application, plus per-instance interventions.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::concept::{improve_balance, pick_target_kind, Concept, ConceptSnapshot, NodeMapper, FIT_SAMPLES};
use crate::error::{Error, Result};
use crate::graph::{NodeId, NodeKind};
use crate::mappers::continuous::target_values;
use crate::mappers::{
    fit_continuous_mapper, init_random_mlp, CategoricalKind, ContinuousKind, ContinuousModel,
    Hyperplane, ParentStats, RootDistribution, TargetFunction, TargetKind,
};
use crate::scalar::{lerp, Real};

pub const INITIAL_SNAPSHOT: &str = "initial";
pub const ROTATION_RANGE_DEGREES: (f64, f64) = (30.0, 150.0);
pub const INTERVENTION_NODES: (usize, usize) = (1, 3);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftKind {
    Distributional,
    Covariate,
    Severe,
    Local,
    Recurrent,
}

impl ShiftKind {
    pub fn name(self) -> &'static str {
        match self {
            ShiftKind::Distributional => "distributional",
            ShiftKind::Covariate => "covariate",
            ShiftKind::Severe => "severe",
            ShiftKind::Local => "local",
            ShiftKind::Recurrent => "recurrent",
        }
    }

    /// Whether the shift can change `P(y | X)`.
    pub fn affects_labels(self) -> bool {
        !matches!(self, ShiftKind::Covariate | ShiftKind::Local)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftRate {
    Abrupt,
    Gradual,
    Incremental,
}

impl DriftRate {
    pub fn name(self) -> &'static str {
        match self {
            DriftRate::Abrupt => "abrupt",
            DriftRate::Gradual => "gradual",
            DriftRate::Incremental => "incremental",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "change", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RootChange<F> {
    /// Replace the distribution outright.
    Set { distribution: RootDistribution<F> },
    /// Move the location by this many standard deviations.
    ShiftMean { scales: F },
}

/// One concrete change to a concept. Node-less variants default to the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mechanism", rename_all = "kebab-case", deny_unknown_fields)]
#[serde(bound(deserialize = "F: Real"))]
pub enum Mechanism<F> {
    RefitNewTargetFn {
        node: NodeId,
        #[serde(default)]
        target: Option<TargetKind>,
    },
    ReinitRandomMlp {
        node: NodeId,
    },
    MovePrototypes {
        #[serde(default)]
        node: Option<NodeId>,
    },
    ChangeDistance {
        #[serde(default)]
        node: Option<NodeId>,
    },
    RotateHyperplane {
        #[serde(default)]
        node: Option<NodeId>,
        #[serde(default)]
        angle_degrees: Option<F>,
    },
    SwapClasses {
        #[serde(default)]
        classes: Option<[usize; 2]>,
    },
    RootParams {
        node: NodeId,
        change: RootChange<F>,
    },
}

impl<F: Real> Mechanism<F> {
    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::RefitNewTargetFn { .. } => "refit-new-target-fn",
            Mechanism::ReinitRandomMlp { .. } => "reinit-random-mlp",
            Mechanism::MovePrototypes { .. } => "move-prototypes",
            Mechanism::ChangeDistance { .. } => "change-distance",
            Mechanism::RotateHyperplane { .. } => "rotate-hyperplane",
            Mechanism::SwapClasses { .. } => "swap-classes",
            Mechanism::RootParams { .. } => "root-params",
        }
    }

    pub fn node(&self, target: NodeId) -> NodeId {
        match self {
            Mechanism::RefitNewTargetFn { node, .. }
            | Mechanism::ReinitRandomMlp { node }
            | Mechanism::RootParams { node, .. } => *node,
            Mechanism::MovePrototypes { node }
            | Mechanism::ChangeDistance { node }
            | Mechanism::RotateHyperplane { node, .. } => node.unwrap_or(target),
            Mechanism::SwapClasses { .. } => target,
        }
    }

    fn mismatch(&self, node: NodeId, reason: impl Into<String>) -> Error {
        Error::Mechanism {
            mechanism: self.name(),
            node: node.0,
            reason: reason.into(),
        }
    }

    /// Structural compatibility with the concept, without drawing anything.
    pub fn check(&self, concept: &Concept<F>) -> Result<()> {
        let node = self.node(concept.target());
        if node.0 >= concept.graph.len() {
            return Err(self.mismatch(node, "no such node"));
        }
        let mapper = &concept.mappers[node.0];
        let ok = match (self, mapper) {
            (Mechanism::RefitNewTargetFn { .. }, NodeMapper::Continuous(m)) => m.kind.is_learned(),
            (Mechanism::ReinitRandomMlp { .. }, NodeMapper::Continuous(m)) => {
                m.kind == ContinuousKind::RandomMlp
            }
            (Mechanism::MovePrototypes { .. }, NodeMapper::Categorical(m)) => m.kind.uses_centroids(),
            (Mechanism::ChangeDistance { .. }, NodeMapper::Categorical(m)) => {
                m.kind == CategoricalKind::Prototype
            }
            (Mechanism::RotateHyperplane { .. }, NodeMapper::Categorical(m)) => {
                m.kind == CategoricalKind::Hyperplane && m.arity() >= 2
            }
            (Mechanism::SwapClasses { classes }, NodeMapper::Categorical(m)) => match classes {
                Some([a, b]) => a != b && *a < m.n_classes && *b < m.n_classes,
                None => true,
            },
            (Mechanism::RootParams { change, .. }, NodeMapper::Root(_)) => match change {
                RootChange::Set { distribution } => distribution.validate().is_ok(),
                RootChange::ShiftMean { scales } => scales.is_finite(),
            },
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(self.mismatch(node, format!("incompatible with {}", mapper.describe())))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(deserialize = "F: Real"))]
pub struct ShiftSpec<F> {
    pub kind: ShiftKind,
    pub rate: DriftRate,
    /// Index of the first instance inside the drift window.
    pub start: u64,
    /// Window length; 1 for abrupt shifts.
    #[serde(default = "one")]
    pub width: u64,
    #[serde(default)]
    pub actions: Vec<Mechanism<F>>,
    /// Save the concept in force just before this event under this name.
    #[serde(default)]
    pub save_as: Option<String>,
    /// Recurrent shifts: the saved concept to bring back.
    #[serde(default)]
    pub restore: Option<String>,
}

fn one() -> u64 {
    1
}

impl<F: Real> ShiftSpec<F> {
    pub fn end(&self) -> u64 {
        self.start + self.width
    }

    pub fn affected_nodes(&self, target: NodeId) -> Vec<NodeId> {
        let mut nodes: Vec<NodeId> = self.actions.iter().map(|a| a.node(target)).collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Schedule(format!("event at {}: {msg}", self.start)));
        if self.width == 0 {
            return bad("window length must be positive".into());
        }
        if (self.rate == DriftRate::Abrupt) != (self.width == 1) {
            return bad("abrupt shifts have a window of exactly 1 and only they do".into());
        }
        let all = |pred: fn(&Mechanism<F>) -> bool| self.actions.iter().all(pred);
        match self.kind {
            ShiftKind::Recurrent => {
                if self.restore.is_none() || !self.actions.is_empty() {
                    return bad("recurrent shifts name a snapshot and carry no actions".into());
                }
                if self.rate == DriftRate::Incremental {
                    return bad("recurrent shifts are abrupt or gradual".into());
                }
                return Ok(());
            }
            _ if self.restore.is_some() => return bad("only recurrent shifts restore snapshots".into()),
            _ if self.actions.is_empty() => return bad("at least one action is required".into()),
            ShiftKind::Covariate | ShiftKind::Local => {
                if !all(|a| matches!(a, Mechanism::RootParams { .. })) {
                    return bad("covariate shifts only change root parameters".into());
                }
                if self.kind == ShiftKind::Local {
                    let nodes = self.affected_nodes(NodeId(usize::MAX));
                    if nodes.len() != 1 {
                        return bad("a local shift affects exactly one feature".into());
                    }
                }
            }
            ShiftKind::Severe => {
                if self.actions.len() != 1 || !all(|a| matches!(a, Mechanism::SwapClasses { .. })) {
                    return bad("a severe shift is a single class swap".into());
                }
                if self.rate == DriftRate::Incremental {
                    return bad("class swaps cannot be applied incrementally".into());
                }
            }
            ShiftKind::Distributional => {
                if !all(|a| {
                    !matches!(a, Mechanism::RootParams { .. } | Mechanism::SwapClasses { .. })
                }) {
                    return bad("distributional shifts change mappers, not roots or class order".into());
                }
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        self.describe_with(|n| format!("node {n}"))
    }

    /// Like [`ShiftSpec::describe`] with a custom node naming.
    pub fn describe_with(&self, node_name: impl Fn(NodeId) -> String) -> String {
        let mut s = format!(
            "t={} {} {} (width {})",
            self.start,
            self.rate.name(),
            self.kind.name(),
            self.width
        );
        for a in &self.actions {
            s.push_str("; ");
            s.push_str(a.name());
            match a {
                Mechanism::RefitNewTargetFn { node, target } => {
                    s.push_str(&format!(" {}", node_name(*node)));
                    if let Some(k) = target {
                        s.push_str(&format!(" -> {}", k.name()));
                    }
                }
                Mechanism::ReinitRandomMlp { node } | Mechanism::RootParams { node, .. } => {
                    s.push_str(&format!(" {}", node_name(*node)))
                }
                Mechanism::SwapClasses { classes: Some([a, b]) } => s.push_str(&format!(" {a}<->{b}")),
                _ => {}
            }
        }
        if let Some(r) = &self.restore {
            s.push_str(&format!("; restore `{r}`"));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(deserialize = "F: Real"))]
pub struct DriftSchedule<F> {
    pub events: Vec<ShiftSpec<F>>,
}

impl<F: Real> DriftSchedule<F> {
    pub fn new(events: Vec<ShiftSpec<F>>) -> Result<Self> {
        let s = DriftSchedule { events };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let mut saved = vec![INITIAL_SNAPSHOT.to_string()];
        let mut prev_end = 0;
        for e in &self.events {
            e.validate()?;
            if e.start < prev_end {
                return Err(Error::Schedule(format!(
                    "event at {} overlaps or precedes the previous window ending at {prev_end}",
                    e.start
                )));
            }
            prev_end = e.end();
            if let Some(r) = &e.restore {
                if !saved.contains(r) {
                    return Err(Error::Schedule(format!("snapshot `{r}` is restored before it is saved")));
                }
            }
            if let Some(name) = &e.save_as {
                if saved.contains(name) {
                    return Err(Error::Schedule(format!("snapshot name `{name}` reused")));
                }
                saved.push(name.clone());
            }
        }
        Ok(())
    }

    /// Checks every action against the concept the schedule will run on.
    pub fn check(&self, concept: &Concept<F>) -> Result<()> {
        for e in &self.events {
            for a in &e.actions {
                a.check(concept)?;
                if e.rate == DriftRate::Incremental {
                    incremental_support(concept, a)?;
                }
            }
        }
        Ok(())
    }
}

/// Saved concepts with the concept id they were in force under.
#[derive(Debug, Clone, Default)]
pub struct SnapshotStore<F> {
    entries: BTreeMap<String, (ConceptSnapshot<F>, usize)>,
}

impl<F: Real> SnapshotStore<F> {
    pub fn save(&mut self, name: &str, snap: ConceptSnapshot<F>, concept_id: usize) {
        self.entries.insert(name.to_string(), (snap, concept_id));
    }

    pub fn get(&self, name: &str) -> Result<&(ConceptSnapshot<F>, usize)> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::UnknownSnapshot(name.to_string()))
    }
}

/// Replaces the concept's mappers, root distributions and permutation with the saved
/// ones. Temporal state is deliberately left alone.
pub fn apply_recurrent<F: Real>(concept: &mut Concept<F>, store: &SnapshotStore<F>, name: &str) -> Result<()> {
    let (snap, _) = store.get(name)?;
    *concept = snap.concept.clone();
    Ok(())
}

/// Two most frequently emitted target classes under the current concept.
pub fn most_frequent_classes<F: Real, R: Rng + ?Sized>(concept: &Concept<F>, rng: &mut R) -> Result<[usize; 2]> {
    let n_classes = concept
        .n_classes()
        .ok_or_else(|| Error::param("class swaps need a categorical target"))?;
    let cols = concept.simulate_table(FIT_SAMPLES, rng)?;
    let mut counts = vec![0usize; n_classes];
    for v in &cols[concept.target().0] {
        counts[v.to_usize().unwrap_or(0).min(n_classes - 1)] += 1;
    }
    let mut order: Vec<usize> = (0..n_classes).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    Ok([order[0], order[1]])
}

fn rotation_angle<F: Real, R: Rng + ?Sized>(given: Option<F>, rng: &mut R) -> F {
    let deg = given.unwrap_or_else(|| {
        F::uniform(rng, F::lit(ROTATION_RANGE_DEGREES.0), F::lit(ROTATION_RANGE_DEGREES.1))
    });
    deg.to_radians()
}

fn new_target_fn<F: Real, R: Rng + ?Sized>(
    current: &Option<TargetFunction<F>>,
    arity: usize,
    requested: Option<TargetKind>,
    rng: &mut R,
) -> Result<TargetFunction<F>> {
    let old = current.as_ref();
    let kind = requested.unwrap_or_else(|| pick_target_kind(&TargetKind::ALL, old.map(|f| f.kind()), rng));
    let noise = old.map_or(F::lit(crate::mappers::target::DEFAULT_NOISE_SCALE), |f| f.noise_scale);
    TargetFunction::random(kind, arity, noise, rng)
}

/// Applies one action in full.
pub fn apply_action<F: Real, R: Rng + ?Sized>(
    concept: &mut Concept<F>,
    action: &Mechanism<F>,
    rng: &mut R,
) -> Result<()> {
    action.check(concept)?;
    let node = action.node(concept.target());
    match action {
        Mechanism::RefitNewTargetFn { target, .. } => {
            let rows = concept.parent_sample(node, FIT_SAMPLES, rng)?;
            let NodeMapper::Continuous(m) = &concept.mappers[node.0] else { unreachable!() };
            let f = new_target_fn(&m.target_fn, m.arity(), *target, rng)?;
            let fitted = fit_continuous_mapper(m.kind, &rows, &f, rng)?;
            concept.mappers[node.0] = NodeMapper::Continuous(fitted);
        }
        Mechanism::ReinitRandomMlp { .. } => {
            let NodeMapper::Continuous(m) = &mut concept.mappers[node.0] else { unreachable!() };
            let fresh = init_random_mlp(m.arity(), rng)?;
            m.model = fresh.model;
        }
        Mechanism::MovePrototypes { .. } => {
            let rows = concept.parent_sample(node, FIT_SAMPLES, rng)?;
            let stats = ParentStats::from_samples(&rows)?;
            let balance = concept.class_balance;
            let NodeMapper::Categorical(m) = &mut concept.mappers[node.0] else { unreachable!() };
            let positions = m.draw_positions(&stats, rng)?;
            m.set_positions(positions);
            improve_balance(m, &stats, &rows, balance, rng)?;
        }
        Mechanism::ChangeDistance { .. } => {
            let NodeMapper::Categorical(m) = &mut concept.mappers[node.0] else { unreachable!() };
            m.distance = m.distance.toggled();
        }
        Mechanism::RotateHyperplane { angle_degrees, .. } => {
            let NodeMapper::Categorical(m) = &mut concept.mappers[node.0] else { unreachable!() };
            let h = m.hyperplane.as_ref().expect("checked hyperplane");
            let angle = rotation_angle(*angle_degrees, rng);
            let u = h.rotation_axis(rng)?;
            m.hyperplane = Some(h.rotated(&u, angle));
        }
        Mechanism::SwapClasses { classes } => {
            let [a, b] = match classes {
                Some(c) => *c,
                None => most_frequent_classes(concept, rng)?,
            };
            for c in concept.class_permutation.iter_mut() {
                if *c == a {
                    *c = b;
                } else if *c == b {
                    *c = a;
                }
            }
        }
        Mechanism::RootParams { change, .. } => {
            let NodeMapper::Root(d) = &mut concept.mappers[node.0] else { unreachable!() };
            *d = match change {
                RootChange::Set { distribution } => distribution.clone(),
                RootChange::ShiftMean { scales } => d.shift_mean(*scales),
            };
        }
    }
    Ok(())
}

/// Applies every action of a shift at once.
pub fn apply_abrupt<F: Real, R: Rng + ?Sized>(
    concept: &mut Concept<F>,
    spec: &ShiftSpec<F>,
    rng: &mut R,
) -> Result<()> {
    for a in &spec.actions {
        apply_action(concept, a, rng)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Old,
    New,
}

/// Picks the concept for instance `t` of a gradual window: the new one with
/// probability `(t - start) / width`. Always consumes one uniform draw.
pub fn gradual_selector<F: Real, R: Rng + ?Sized>(t: u64, start: u64, width: u64, rng: &mut R) -> Result<Side> {
    if t < start || t >= start + width {
        return Err(Error::Window {
            t,
            start,
            end: start + width,
        });
    }
    let u = F::unit(rng);
    let p = F::from_u64(t - start).unwrap_or_else(F::max_value) / F::from_u64(width).unwrap_or_else(F::max_value);
    Ok(if u < p { Side::New } else { Side::Old })
}

#[derive(Debug, Clone)]
pub struct GradualShift<F> {
    pub start: u64,
    pub width: u64,
    pub old: Concept<F>,
    pub new: Concept<F>,
}

fn incremental_support<F: Real>(concept: &Concept<F>, action: &Mechanism<F>) -> Result<()> {
    let node = action.node(concept.target());
    let ok = match (action, &concept.mappers[node.0]) {
        (Mechanism::RootParams { .. }, _)
        | (Mechanism::MovePrototypes { .. }, _)
        | (Mechanism::RotateHyperplane { .. }, _)
        | (Mechanism::ReinitRandomMlp { .. }, _) => true,
        (Mechanism::RefitNewTargetFn { .. }, NodeMapper::Continuous(m)) => m.kind == ContinuousKind::SgdLinear,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Mechanism {
            mechanism: action.name(),
            node: node.0,
            reason: "has no incremental form for this mapper".into(),
        })
    }
}

#[derive(Debug, Clone)]
struct Rotation<F> {
    node: usize,
    base: Hyperplane<F>,
    axis: Vec<F>,
    angle: F,
}

#[derive(Debug, Clone)]
struct SgdPlan<F> {
    node: usize,
    target: TargetFunction<F>,
    rows: Vec<Vec<F>>,
    ys: Vec<F>,
}

/// A shift spread over `width` instances. Geometric parameters move by linear
/// interpolation; sgd-linear mappers take one partial-fit step per instance toward
/// the new target function.
#[derive(Debug, Clone)]
pub struct IncrementalShift<F> {
    pub start: u64,
    pub width: u64,
    from: Concept<F>,
    to: Concept<F>,
    changed: Vec<usize>,
    rotations: Vec<Rotation<F>>,
    sgd: Vec<SgdPlan<F>>,
}

impl<F: Real> IncrementalShift<F> {
    pub fn plan<R: Rng + ?Sized>(concept: &Concept<F>, spec: &ShiftSpec<F>, rng: &mut R) -> Result<Self> {
        if spec.rate != DriftRate::Incremental {
            return Err(Error::Schedule("not an incremental shift".into()));
        }
        let width = usize::try_from(spec.width).map_err(|_| Error::Schedule("window too long".into()))?;
        let mut to = concept.clone();
        let mut rotations = Vec::new();
        let mut sgd = Vec::new();
        for a in &spec.actions {
            a.check(concept)?;
            incremental_support(concept, a)?;
            let node = a.node(concept.target());
            match a {
                Mechanism::RotateHyperplane { angle_degrees, .. } => {
                    let NodeMapper::Categorical(m) = &mut to.mappers[node.0] else { unreachable!() };
                    let base = m.hyperplane.clone().expect("checked hyperplane");
                    let angle = rotation_angle(*angle_degrees, rng);
                    let axis = base.rotation_axis(rng)?;
                    m.hyperplane = Some(base.rotated(&axis, angle));
                    rotations.push(Rotation { node: node.0, base, axis, angle });
                }
                Mechanism::RefitNewTargetFn { target, .. } => {
                    let NodeMapper::Continuous(m) = &concept.mappers[node.0] else { unreachable!() };
                    let f = new_target_fn(&m.target_fn, m.arity(), *target, rng)?;
                    let rows = concept.parent_sample(node, width, rng)?;
                    let z = m.input.apply_rows(&rows);
                    let ys = target_values(&f, &z, rng)?;
                    sgd.push(SgdPlan { node: node.0, target: f, rows, ys });
                }
                _ => apply_action(&mut to, a, rng)?,
            }
        }
        let sgd_nodes: Vec<usize> = sgd.iter().map(|p| p.node).collect();
        let changed = (0..concept.mappers.len())
            .filter(|i| !sgd_nodes.contains(i) && concept.mappers[*i] != to.mappers[*i])
            .collect();
        Ok(IncrementalShift {
            start: spec.start,
            width: spec.width,
            from: concept.clone(),
            to,
            changed,
            rotations,
            sgd,
        })
    }

    /// Concept the shift ends at, except for sgd-linear nodes which evolve in place.
    pub fn endpoint(&self) -> &Concept<F> {
        &self.to
    }

    /// Moves `live` to its state for instance `t`; step `k = t - start + 1` of `width`.
    pub fn advance(&self, live: &mut Concept<F>, t: u64) -> Result<()> {
        if t < self.start || t >= self.start + self.width {
            return Err(Error::Window {
                t,
                start: self.start,
                end: self.start + self.width,
            });
        }
        let k = t - self.start + 1;
        let last = k == self.width;
        let frac = F::from_u64(k).unwrap_or_else(F::max_value) / F::from_u64(self.width).unwrap_or_else(F::max_value);
        for &i in &self.changed {
            if last {
                live.mappers[i] = self.to.mappers[i].clone();
                continue;
            }
            live.mappers[i] = match (&self.from.mappers[i], &self.to.mappers[i]) {
                (NodeMapper::Root(a), NodeMapper::Root(b)) => NodeMapper::Root(a.interpolate(b, frac)?),
                (NodeMapper::Categorical(a), NodeMapper::Categorical(b)) => {
                    let mut m = a.clone();
                    if let Some(r) = self.rotations.iter().find(|r| r.node == i) {
                        m.hyperplane = Some(r.base.rotated(&r.axis, r.angle * frac));
                    } else {
                        let pos = a
                            .centroids
                            .iter()
                            .zip(&b.centroids)
                            .map(|(p, q)| {
                                p.position
                                    .iter()
                                    .zip(&q.position)
                                    .map(|(&x, &y)| lerp(x, y, frac))
                                    .collect()
                            })
                            .collect();
                        m.set_positions(pos);
                    }
                    NodeMapper::Categorical(m)
                }
                (NodeMapper::Continuous(a), NodeMapper::Continuous(b)) => {
                    let mut m = a.clone();
                    if let (ContinuousModel::Mlp(p), ContinuousModel::Mlp(q)) = (&a.model, &b.model) {
                        m.model = ContinuousModel::Mlp(p.interpolate(q, frac)?);
                    }
                    NodeMapper::Continuous(m)
                }
                _ => return Err(Error::Schedule("mapper role changed during an incremental shift".into())),
            };
        }
        let idx = usize::try_from(k - 1).expect("window index fits in memory");
        for plan in &self.sgd {
            let NodeMapper::Continuous(m) = &mut live.mappers[plan.node] else {
                return Err(Error::Schedule("sgd node lost its mapper".into()));
            };
            m.partial_fit(&plan.rows[idx], plan.ys[idx])?;
            if last {
                m.target_fn = Some(plan.target.clone());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ForcedValue<F> {
    /// `center + spread * scale * z`, `z ~ N(0, 1)`.
    Normal { spread: F },
    /// Uniform on `center ± spread * scale * sqrt(3)` (same variance as `Normal`).
    Uniform { spread: F },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "F: Real"))]
pub struct InterventionPolicy<F> {
    pub probability: F,
    /// Allow the target itself to be forced.
    pub include_target: bool,
    pub forced: ForcedValue<F>,
}

impl<F: Real> Default for InterventionPolicy<F> {
    fn default() -> Self {
        InterventionPolicy {
            probability: F::zero(),
            include_target: false,
            forced: ForcedValue::Normal { spread: F::one() },
        }
    }
}

impl<F: Real> InterventionPolicy<F> {
    pub fn with_probability(probability: F) -> Self {
        InterventionPolicy {
            probability,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.probability >= F::zero() && self.probability <= F::one()) {
            return Err(Error::Config("intervention probability must lie in [0, 1]".into()));
        }
        match self.forced {
            ForcedValue::Normal { spread } | ForcedValue::Uniform { spread } if spread >= F::zero() => Ok(()),
            _ => Err(Error::Config("forced-value spread must be non-negative".into())),
        }
    }
}

/// With probability `p`, forces 1 to 3 distinct nodes to values drawn independently of
/// their parents. Continuous nodes get draws around their fit-time center; categorical
/// nodes get a uniformly random class.
pub fn draw_interventions<F: Real, R: Rng + ?Sized>(
    policy: &InterventionPolicy<F>,
    concept: &Concept<F>,
    rng: &mut R,
) -> Vec<(NodeId, F)> {
    if F::unit(rng) >= policy.probability {
        return Vec::new();
    }
    let target = concept.target();
    let eligible: Vec<NodeId> = concept
        .graph
        .nodes()
        .filter(|n| policy.include_target || *n != target)
        .collect();
    if eligible.is_empty() {
        return Vec::new();
    }
    let k = rng
        .random_range(INTERVENTION_NODES.0..=INTERVENTION_NODES.1)
        .min(eligible.len());
    let mut picked: Vec<NodeId> = index::sample(rng, eligible.len(), k)
        .into_iter()
        .map(|i| eligible[i])
        .collect();
    picked.sort_unstable();
    picked
        .into_iter()
        .map(|node| {
            let v = match (concept.graph.kind(node), concept.classes_of(node)) {
                (NodeKind::Categorical, Some(c)) => F::from_count(rng.random_range(0..c)),
                _ => {
                    let s = concept.scales[node.0];
                    match policy.forced {
                        ForcedValue::Normal { spread } => s.center + spread * s.scale * F::standard_normal(rng),
                        ForcedValue::Uniform { spread } => {
                            let h = F::lit(3.0).sqrt();
                            s.center + spread * s.scale * F::uniform(rng, -h, h)
                        }
                    }
                }
            };
            (node, v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::{init_concept, ConceptSettings, NodePin};
    use crate::graph::CausalGraph;
    use crate::mappers::{CategoricalMapper, Centroid, Distance};
    use crate::rng::seeded;
    use crate::temporal::TemporalParams;

    fn graph() -> CausalGraph {
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

    fn concept(pins: Vec<(usize, NodePin<f64>)>, classes: usize, seed: u64) -> Concept<f64> {
        let mut s = ConceptSettings::default();
        s.n_classes = classes;
        s.pins.extend(pins);
        init_concept(&graph(), &s, TemporalParams::default(), &mut seeded(seed)).unwrap()
    }

    fn abrupt(kind: ShiftKind, actions: Vec<Mechanism<f64>>) -> ShiftSpec<f64> {
        ShiftSpec {
            kind,
            rate: DriftRate::Abrupt,
            start: 10,
            width: 1,
            actions,
            save_as: None,
            restore: None,
        }
    }

    #[test]
    fn swap_twice_is_identity() {
        let mut c = concept(vec![], 3, 1);
        let swap = Mechanism::SwapClasses { classes: Some([0, 2]) };
        apply_action(&mut c, &swap, &mut seeded(0)).unwrap();
        assert_eq!(c.class_permutation, vec![2, 1, 0]);
        apply_action(&mut c, &swap, &mut seeded(0)).unwrap();
        assert_eq!(c.class_permutation, vec![0, 1, 2]);
    }

    #[test]
    fn root_change_leaves_mappers_untouched() {
        let c0 = concept(vec![(0, NodePin::Root { kind: None, distribution: Some(RootDistribution::normal(0.0, 1.0).unwrap()) })], 2, 2);
        let mut c = c0.clone();
        let spec = abrupt(
            ShiftKind::Covariate,
            vec![Mechanism::RootParams {
                node: NodeId(0),
                change: RootChange::Set { distribution: RootDistribution::normal(5.0, 1.0).unwrap() },
            }],
        );
        apply_abrupt(&mut c, &spec, &mut seeded(3)).unwrap();
        assert_eq!(c.mappers[0], NodeMapper::Root(RootDistribution::normal(5.0, 1.0).unwrap()));
        for i in 1..4 {
            assert_eq!(
                serde_json::to_string(&c.mappers[i]).unwrap(),
                serde_json::to_string(&c0.mappers[i]).unwrap()
            );
        }
    }

    #[test]
    fn refit_changes_target_function_kind() {
        let mut c = concept(
            vec![(2, NodePin::Continuous { kind: ContinuousKind::LearnedMlp, target: Some(TargetKind::Sine) })],
            2,
            4,
        );
        let a = Mechanism::RefitNewTargetFn { node: NodeId(2), target: Some(TargetKind::Step) };
        apply_action(&mut c, &a, &mut seeded(5)).unwrap();
        let NodeMapper::Continuous(m) = &c.mappers[2] else { panic!() };
        assert_eq!(m.target_fn.as_ref().unwrap().kind(), TargetKind::Step);
        assert_eq!(m.kind, ContinuousKind::LearnedMlp);
        let auto = Mechanism::RefitNewTargetFn { node: NodeId(2), target: None };
        apply_action(&mut c, &auto, &mut seeded(6)).unwrap();
        let NodeMapper::Continuous(m) = &c.mappers[2] else { panic!() };
        assert_ne!(m.target_fn.as_ref().unwrap().kind(), TargetKind::Step);
    }

    #[test]
    fn mechanism_kind_mismatches_rejected() {
        let mut c = concept(vec![(2, NodePin::Continuous { kind: ContinuousKind::RandomMlp, target: None })], 2, 1);
        for a in [
            Mechanism::RefitNewTargetFn { node: NodeId(2), target: None },
            Mechanism::ReinitRandomMlp { node: NodeId(0) },
            Mechanism::RootParams { node: NodeId(2), change: RootChange::ShiftMean { scales: 1.0 } },
            Mechanism::SwapClasses { classes: Some([0, 5]) },
            Mechanism::RotateHyperplane { node: None, angle_degrees: None },
        ] {
            assert!(matches!(apply_action(&mut c, &a, &mut seeded(0)), Err(Error::Mechanism { .. })), "{a:?}");
        }
    }

    #[test]
    fn spec_invariants() {
        let swap = Mechanism::SwapClasses { classes: None };
        let root = Mechanism::RootParams { node: NodeId(0), change: RootChange::ShiftMean { scales: 1.0 } };
        assert!(abrupt(ShiftKind::Severe, vec![swap.clone()]).validate().is_ok());
        assert!(abrupt(ShiftKind::Covariate, vec![swap.clone()]).validate().is_err());
        assert!(abrupt(ShiftKind::Severe, vec![root.clone()]).validate().is_err());
        let mut two_nodes = abrupt(
            ShiftKind::Local,
            vec![root.clone(), Mechanism::RootParams { node: NodeId(1), change: RootChange::ShiftMean { scales: 1.0 } }],
        );
        assert!(two_nodes.validate().is_err());
        two_nodes.kind = ShiftKind::Covariate;
        assert!(two_nodes.validate().is_ok());
        let mut wide = abrupt(ShiftKind::Severe, vec![swap]);
        wide.width = 5;
        assert!(wide.validate().is_err());
        wide.rate = DriftRate::Gradual;
        assert!(wide.validate().is_ok());
        let mut rec = abrupt(ShiftKind::Recurrent, vec![]);
        assert!(rec.validate().is_err());
        rec.restore = Some(INITIAL_SNAPSHOT.into());
        assert!(rec.validate().is_ok());
    }

    #[test]
    fn schedule_rejects_overlap_and_unknown_snapshots() {
        let swap = || Mechanism::SwapClasses { classes: None };
        let mut a = abrupt(ShiftKind::Severe, vec![swap()]);
        a.rate = DriftRate::Gradual;
        a.width = 20;
        let b = abrupt(ShiftKind::Severe, vec![swap()]);
        let mut b2 = b.clone();
        b2.start = 15;
        assert!(DriftSchedule::new(vec![a.clone(), b2]).is_err());
        let mut b3 = b.clone();
        b3.start = 30;
        assert!(DriftSchedule::new(vec![a.clone(), b3.clone()]).is_ok());
        let mut rec = abrupt(ShiftKind::Recurrent, vec![]);
        rec.start = 40;
        rec.restore = Some("later".into());
        assert!(DriftSchedule::new(vec![a.clone(), rec.clone()]).is_err());
        a.save_as = Some("later".into());
        assert!(DriftSchedule::new(vec![a, rec]).is_ok());
    }

    #[test]
    fn gradual_selector_endpoints() {
        let mut rng = seeded(1);
        for _ in 0..1000 {
            assert_eq!(gradual_selector::<f64, _>(100, 100, 250, &mut rng).unwrap(), Side::Old);
        }
        let news = (0..1000)
            .filter(|_| gradual_selector::<f64, _>(349, 100, 250, &mut rng).unwrap() == Side::New)
            .count();
        assert!(news > 980);
        assert!(gradual_selector::<f64, _>(350, 100, 250, &mut rng).is_err());
        assert!(gradual_selector::<f64, _>(99, 100, 250, &mut rng).is_err());
    }

    #[test]
    fn incremental_centroid_path() {
        let m = CategoricalMapper::from_centroids(
            CategoricalKind::Prototype,
            2,
            vec![
                Centroid { position: vec![0.0, 0.0], class: 0, spread: 1.0 },
                Centroid { position: vec![5.0, 5.0], class: 1, spread: 1.0 },
            ],
            Distance::Euclidean,
        )
        .unwrap();
        let mut c = concept(vec![], 2, 3);
        c.mappers[3] = NodeMapper::Categorical(m.clone());
        let mut end = c.clone();
        let NodeMapper::Categorical(e) = &mut end.mappers[3] else { panic!() };
        e.centroids[0].position = vec![1.0, 0.0];
        let shift = IncrementalShift {
            start: 0,
            width: 4,
            from: c.clone(),
            to: end.clone(),
            changed: vec![3],
            rotations: vec![],
            sgd: vec![],
        };
        let mut live = c.clone();
        let mut xs = Vec::new();
        for t in 0..4 {
            shift.advance(&mut live, t).unwrap();
            let NodeMapper::Categorical(l) = &live.mappers[3] else { panic!() };
            xs.push(l.centroids[0].position[0]);
        }
        assert_eq!(xs, vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(live, end);
        assert!(shift.advance(&mut live, 4).is_err());
    }

    #[test]
    fn incremental_plan_reaches_endpoint() {
        let c = concept(vec![(3, NodePin::Categorical { kind: CategoricalKind::Hyperplane, classes: None })], 2, 7);
        let spec = ShiftSpec {
            kind: ShiftKind::Distributional,
            rate: DriftRate::Incremental,
            start: 5,
            width: 10,
            actions: vec![Mechanism::RotateHyperplane { node: None, angle_degrees: Some(90.0) }],
            save_as: None,
            restore: None,
        };
        let plan = IncrementalShift::plan(&c, &spec, &mut seeded(1)).unwrap();
        let mut live = c.clone();
        for t in 5..15 {
            plan.advance(&mut live, t).unwrap();
        }
        assert_eq!(&live, plan.endpoint());
        assert_ne!(live, c);
        let mut bad = spec.clone();
        bad.actions = vec![Mechanism::ChangeDistance { node: None }];
        assert!(IncrementalShift::plan(&c, &bad, &mut seeded(1)).is_err());
    }

    #[test]
    fn incremental_sgd_takes_one_step_per_instance() {
        let c = concept(
            vec![(2, NodePin::Continuous { kind: ContinuousKind::SgdLinear, target: Some(TargetKind::Linear) })],
            2,
            8,
        );
        let spec = ShiftSpec {
            kind: ShiftKind::Distributional,
            rate: DriftRate::Incremental,
            start: 0,
            width: 50,
            actions: vec![Mechanism::RefitNewTargetFn { node: NodeId(2), target: Some(TargetKind::Sine) }],
            save_as: None,
            restore: None,
        };
        let plan = IncrementalShift::plan(&c, &spec, &mut seeded(2)).unwrap();
        let mut live = c.clone();
        let updates = |c: &Concept<f64>| match &c.mappers[2] {
            NodeMapper::Continuous(m) => match &m.model {
                ContinuousModel::Linear(l) => l.updates,
                _ => panic!(),
            },
            _ => panic!(),
        };
        let before = updates(&live);
        for t in 0..50 {
            plan.advance(&mut live, t).unwrap();
        }
        assert_eq!(updates(&live), before + 50);
        let NodeMapper::Continuous(m) = &live.mappers[2] else { panic!() };
        assert_eq!(m.target_fn.as_ref().unwrap().kind(), TargetKind::Sine);
    }

    #[test]
    fn recurrent_restore() {
        let c0 = concept(vec![], 3, 9);
        let mut store = SnapshotStore::default();
        store.save("a", crate::concept::snapshot(&c0, &c0.initial_state()), 0);
        let mut c = c0.clone();
        apply_action(&mut c, &Mechanism::MovePrototypes { node: None }, &mut seeded(1)).unwrap();
        apply_action(&mut c, &Mechanism::SwapClasses { classes: None }, &mut seeded(1)).unwrap();
        assert_ne!(c, c0);
        apply_recurrent(&mut c, &store, "a").unwrap();
        assert_eq!(c, c0);
        apply_recurrent(&mut c, &store, "a").unwrap();
        assert_eq!(c, c0);
        assert!(matches!(apply_recurrent(&mut c, &store, "zzz"), Err(Error::UnknownSnapshot(_))));
    }

    #[test]
    fn intervention_counts() {
        let c = concept(vec![], 2, 1);
        let mut rng = seeded(4);
        let none = InterventionPolicy::with_probability(0.0);
        assert!((0..10_000).all(|_| draw_interventions(&none, &c, &mut rng).is_empty()));
        let all = InterventionPolicy::with_probability(1.0);
        for _ in 0..1000 {
            let d = draw_interventions(&all, &c, &mut rng);
            assert!((1..=3).contains(&d.len()));
            assert!(d.iter().all(|(n, _)| *n != c.target()));
        }
    }
}
