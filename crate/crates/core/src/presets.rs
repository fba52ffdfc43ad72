//! Built-in stream recipes.
//!
//! `dataset1`..`dataset3` share one six-node graph (`x1..x5`, `y`) with fixed mapper
//! assignments and four events at rows 500, 1000, 1500 and 2000. `dataset4`..`dataset8`
//! are random-graph templates with randomly drawn schedules. `regression1`..`regression4`
//! reuse the small graph with a continuous target and an event every 2000 rows.

use std::collections::BTreeMap;

use crate::concept::{ConceptSettings, NodePin};
use crate::drift::{DriftRate, DriftSchedule, Mechanism, RootChange, ShiftKind, ShiftSpec};
use crate::error::{Error, Result};
use crate::generator::{GeneratorConfig, RandomDrift};
use crate::graph::{DagParams, GraphSpec, NodeId, NodeKind, Task};
use crate::mappers::{CategoricalKind, ContinuousKind, RootDistribution, RootKind, TargetKind};
use crate::scalar::Real;
use crate::temporal::TemporalParams;

pub const SMALL_ROWS: u64 = 2500;
pub const SMALL_SPACING: u64 = 500;
pub const SMALL_WINDOW: u64 = 250;
pub const REGRESSION_ROWS: u64 = 10_000;
pub const REGRESSION_SPACING: u64 = 2000;

/// Mean shift, in standard deviations, used by the covariate events.
const COVARIATE_SHIFT: f64 = 1.5;

pub const NAMES: [&str; 12] = [
    "dataset1",
    "dataset2",
    "dataset3",
    "dataset4",
    "dataset5",
    "dataset6",
    "dataset7",
    "dataset8",
    "regression1",
    "regression2",
    "regression3",
    "regression4",
];

const X1: usize = 0;
const X2: usize = 1;
const X3: usize = 2;
const X4: usize = 3;
const X5: usize = 4;
const Y: usize = 5;

fn small_graph(target: NodeKind) -> GraphSpec {
    let p = |ids: &[usize]| ids.iter().map(|&i| NodeId(i)).collect::<Vec<_>>();
    GraphSpec {
        parents: vec![p(&[]), p(&[]), p(&[X1, X2]), p(&[X3]), p(&[X3]), p(&[X3, X4, X5])],
        kinds: vec![
            NodeKind::Continuous,
            NodeKind::Continuous,
            NodeKind::Continuous,
            NodeKind::Continuous,
            NodeKind::Continuous,
            target,
        ],
        target: NodeId(Y),
    }
}

fn learned(kind: ContinuousKind, target: TargetKind) -> NodePin<f64> {
    NodePin::Continuous {
        kind,
        target: Some(target),
    }
}

fn small_pins(
    x3: NodePin<f64>,
    x5: NodePin<f64>,
    y: NodePin<f64>,
) -> Result<BTreeMap<usize, NodePin<f64>>> {
    Ok(BTreeMap::from([
        (
            X1,
            NodePin::Root {
                kind: Some(RootKind::Normal),
                distribution: Some(RootDistribution::normal(0.0, 1.0)?),
            },
        ),
        (
            X2,
            NodePin::Root {
                kind: Some(RootKind::Uniform),
                distribution: Some(RootDistribution::uniform(-2.0, 2.0)?),
            },
        ),
        (X3, x3),
        (
            X4,
            NodePin::Continuous {
                kind: ContinuousKind::RandomMlp,
                target: None,
            },
        ),
        (X5, x5),
        (Y, y),
    ]))
}

fn event(
    kind: ShiftKind,
    rate: DriftRate,
    start: u64,
    actions: Vec<Mechanism<f64>>,
) -> ShiftSpec<f64> {
    ShiftSpec {
        kind,
        rate,
        start,
        width: if rate == DriftRate::Abrupt { 1 } else { SMALL_WINDOW },
        actions,
        save_as: None,
        restore: None,
    }
}

fn shift_mean(node: usize) -> Mechanism<f64> {
    Mechanism::RootParams {
        node: NodeId(node),
        change: RootChange::ShiftMean {
            scales: COVARIATE_SHIFT,
        },
    }
}

fn refit(node: usize, target: TargetKind) -> Mechanism<f64> {
    Mechanism::RefitNewTargetFn {
        node: NodeId(node),
        target: Some(target),
    }
}

fn move_prototypes() -> Mechanism<f64> {
    Mechanism::MovePrototypes { node: None }
}

fn swap() -> Mechanism<f64> {
    Mechanism::SwapClasses { classes: None }
}

fn small_config(
    classes: usize,
    pins: BTreeMap<usize, NodePin<f64>>,
    events: Vec<ShiftSpec<f64>>,
) -> Result<GeneratorConfig<f64>> {
    let mut concept = ConceptSettings::default();
    concept.n_classes = classes;
    concept.pins = pins;
    Ok(GeneratorConfig {
        graph: Some(small_graph(NodeKind::Categorical)),
        dag: None,
        concept,
        schedule: DriftSchedule::new(events)?,
        temporal: TemporalParams::default(),
        ..GeneratorConfig::new(SMALL_ROWS, DagParams::new(5, 2, 1, 3))
    })
}

fn dataset1() -> Result<GeneratorConfig<f64>> {
    use DriftRate::Abrupt;
    let pins = small_pins(
        learned(ContinuousKind::LearnedMlp, TargetKind::Sine),
        learned(ContinuousKind::SgdLinear, TargetKind::Checkerboard),
        NodePin::Categorical {
            kind: CategoricalKind::Prototype,
            classes: Some(4),
        },
    )?;
    small_config(
        4,
        pins,
        vec![
            event(ShiftKind::Covariate, Abrupt, 500, vec![shift_mean(X1)]),
            event(
                ShiftKind::Distributional,
                Abrupt,
                1000,
                vec![move_prototypes(), refit(X5, TargetKind::Sine)],
            ),
            event(ShiftKind::Severe, Abrupt, 1500, vec![swap()]),
            event(
                ShiftKind::Distributional,
                Abrupt,
                2000,
                vec![move_prototypes(), refit(X3, TargetKind::Step)],
            ),
        ],
    )
}

fn dataset2() -> Result<GeneratorConfig<f64>> {
    let pins = small_pins(
        learned(ContinuousKind::RegressionTree, TargetKind::Linear),
        learned(ContinuousKind::SgdLinear, TargetKind::Rbf),
        NodePin::Categorical {
            kind: CategoricalKind::RandomRbf,
            classes: Some(5),
        },
    )?;
    small_config(
        5,
        pins,
        vec![
            event(ShiftKind::Covariate, DriftRate::Abrupt, 500, vec![shift_mean(X2)]),
            event(
                ShiftKind::Distributional,
                DriftRate::Incremental,
                1000,
                vec![move_prototypes(), refit(X5, TargetKind::Checkerboard)],
            ),
            event(ShiftKind::Severe, DriftRate::Gradual, 1500, vec![swap()]),
            event(
                ShiftKind::Distributional,
                DriftRate::Abrupt,
                2000,
                vec![move_prototypes(), refit(X3, TargetKind::Sine)],
            ),
        ],
    )
}

fn dataset3() -> Result<GeneratorConfig<f64>> {
    let pins = small_pins(
        learned(ContinuousKind::RegressionTree, TargetKind::Step),
        learned(ContinuousKind::SgdLinear, TargetKind::Sine),
        NodePin::Categorical {
            kind: CategoricalKind::GaussianPrototype,
            classes: Some(3),
        },
    )?;
    let mut recurrent = event(ShiftKind::Recurrent, DriftRate::Abrupt, 1000, vec![]);
    recurrent.restore = Some(crate::drift::INITIAL_SNAPSHOT.into());
    small_config(
        3,
        pins,
        vec![
            event(
                ShiftKind::Distributional,
                DriftRate::Abrupt,
                500,
                vec![
                    move_prototypes(),
                    Mechanism::ReinitRandomMlp { node: NodeId(X4) },
                ],
            ),
            recurrent,
            event(ShiftKind::Severe, DriftRate::Gradual, 1500, vec![swap()]),
            event(
                ShiftKind::Distributional,
                DriftRate::Abrupt,
                2000,
                vec![move_prototypes(), refit(X3, TargetKind::Linear)],
            ),
        ],
    )
}

struct Template {
    graph_features: usize,
    emitted: Option<usize>,
    classes: usize,
    concepts: usize,
    rows: u64,
    p_m: f64,
}

const TEMPLATES: [Template; 5] = [
    Template { graph_features: 10, emitted: None, classes: 10, concepts: 10, rows: 10_000, p_m: 0.0 },
    Template { graph_features: 25, emitted: None, classes: 2, concepts: 10, rows: 10_000, p_m: 0.1 },
    Template { graph_features: 150, emitted: Some(100), classes: 3, concepts: 20, rows: 10_000, p_m: 0.1 },
    Template { graph_features: 100, emitted: Some(10), classes: 7, concepts: 20, rows: 100_000, p_m: 0.0 },
    Template { graph_features: 200, emitted: Some(25), classes: 2, concepts: 100, rows: 100_000, p_m: 0.0 },
];

fn template(t: &Template) -> GeneratorConfig<f64> {
    let mut dag = DagParams::new(t.graph_features, (t.graph_features / 5).max(2), 1, 3);
    dag.task = Task::Classification;
    let mut concept = ConceptSettings::default();
    concept.n_classes = t.classes;
    GeneratorConfig {
        p_i: 0.1,
        p_m: t.p_m,
        concept,
        random_drift: Some(RandomDrift {
            concepts: t.concepts,
            rates: vec![DriftRate::Abrupt, DriftRate::Gradual, DriftRate::Incremental],
            ..RandomDrift::default()
        }),
        feature_subsample: t.emitted,
        ..GeneratorConfig::new(t.rows, dag)
    }
}

fn regression(index: usize) -> Result<GeneratorConfig<f64>> {
    let distributional = index <= 2;
    let (x3, x5, y_kind, y_fn) = match index {
        1 => (
            learned(ContinuousKind::LearnedMlp, TargetKind::Sine),
            learned(ContinuousKind::SgdLinear, TargetKind::Checkerboard),
            ContinuousKind::RegressionTree,
            TargetKind::Linear,
        ),
        2 => (
            learned(ContinuousKind::RegressionTree, TargetKind::Linear),
            learned(ContinuousKind::SgdLinear, TargetKind::Rbf),
            ContinuousKind::LearnedMlp,
            TargetKind::Sine,
        ),
        3 => (
            learned(ContinuousKind::RegressionTree, TargetKind::Step),
            learned(ContinuousKind::SgdLinear, TargetKind::Sine),
            ContinuousKind::RegressionTree,
            TargetKind::Linear,
        ),
        _ => (
            learned(ContinuousKind::LearnedMlp, TargetKind::Linear),
            learned(ContinuousKind::SgdLinear, TargetKind::Sine),
            ContinuousKind::LearnedMlp,
            TargetKind::Linear,
        ),
    };
    let pins = small_pins(x3, x5, learned(y_kind, y_fn))?;
    let fns = [TargetKind::Step, TargetKind::Linear, TargetKind::Sine, TargetKind::Linear];
    let events = (1..REGRESSION_ROWS / REGRESSION_SPACING)
        .map(|k| {
            let start = k * REGRESSION_SPACING;
            if distributional {
                event(
                    ShiftKind::Distributional,
                    DriftRate::Abrupt,
                    start,
                    vec![refit(Y, fns[(k as usize - 1) % fns.len()])],
                )
            } else {
                let root = if k % 2 == 1 { X1 } else { X2 };
                event(ShiftKind::Covariate, DriftRate::Abrupt, start, vec![shift_mean(root)])
            }
        })
        .collect();
    let mut concept = ConceptSettings::default();
    concept.pins = pins;
    Ok(GeneratorConfig {
        graph: Some(small_graph(NodeKind::Continuous)),
        dag: None,
        concept,
        schedule: DriftSchedule::new(events)?,
        ..GeneratorConfig::new(REGRESSION_ROWS, DagParams::new(5, 2, 1, 3))
    })
}

/// A preset configuration in `f64`.
pub fn preset_f64(name: &str) -> Result<GeneratorConfig<f64>> {
    match name {
        "dataset1" => dataset1(),
        "dataset2" => dataset2(),
        "dataset3" => dataset3(),
        "regression1" => regression(1),
        "regression2" => regression(2),
        "regression3" => regression(3),
        "regression4" => regression(4),
        _ => match name.strip_prefix("dataset").and_then(|s| s.parse::<usize>().ok()) {
            Some(i @ 4..=8) => Ok(template(&TEMPLATES[i - 4])),
            _ => Err(Error::UnknownPreset(name.to_string())),
        },
    }
}

/// A preset configuration in any precision.
pub fn preset<F: Real>(name: &str) -> Result<GeneratorConfig<F>> {
    let cfg = preset_f64(name)?;
    let json = serde_json::to_value(&cfg)?;
    Ok(serde_json::from_value(json)?)
}

pub fn summary(name: &str) -> Result<&'static str> {
    Ok(match name {
        "dataset1" => "5 features, 4 classes, 2500 rows; covariate, distributional, severe, distributional (all abrupt)",
        "dataset2" => "5 features, 5 classes, 2500 rows; covariate, incremental distributional, gradual severe, distributional",
        "dataset3" => "5 features, 3 classes, 2500 rows; distributional, recurrent, gradual severe, distributional",
        "dataset4" => "10 features, 10 classes, 10 concepts, 10000 rows, 10% interventions",
        "dataset5" => "25 features, 2 classes, 10 concepts, 10000 rows, 10% missing, 10% interventions",
        "dataset6" => "100 of 150 graph features, 3 classes, 20 concepts, 10000 rows, 10% missing, 10% interventions",
        "dataset7" => "10 of 100 graph features, 7 classes, 20 concepts, 100000 rows, 10% interventions",
        "dataset8" => "25 of 200 graph features, 2 classes, 100 concepts, 100000 rows, 10% interventions",
        "regression1" | "regression2" => "5 features, continuous target, 10000 rows; target refit every 2000 rows",
        "regression3" | "regression4" => "5 features, continuous target, 10000 rows; root mean shift every 2000 rows",
        _ => return Err(Error::UnknownPreset(name.to_string())),
    })
}

fn pin_text(pin: &NodePin<f64>) -> String {
    match pin {
        NodePin::Root { distribution: Some(d), .. } => match d {
            RootDistribution::Normal { mean, variance } => format!("normal(mean={mean}, variance={variance})"),
            RootDistribution::Uniform { low, high } => format!("uniform(low={low}, high={high})"),
        },
        NodePin::Root { kind, .. } => format!("{kind:?} root"),
        NodePin::Continuous { kind, target } => match target {
            Some(t) => format!("{}/{}", kind.name(), t.name()),
            None => kind.name().to_string(),
        },
        NodePin::Categorical { kind, classes } => match classes {
            Some(c) => format!("{} ({c} classes)", kind.name()),
            None => kind.name().to_string(),
        },
    }
}

/// Human-readable listing of a preset's mapper bindings and events.
pub fn describe(name: &str) -> Result<String> {
    let cfg = preset_f64(name)?;
    let mut out = format!("{name}: {}\n", summary(name)?);
    out.push_str(&format!(
        "alpha={} rho={} sigma={} p_i={} p_m={}\n",
        cfg.temporal.alpha, cfg.temporal.rho, cfg.temporal.sigma, cfg.p_i, cfg.p_m
    ));
    if let Some(graph) = &cfg.graph {
        for (i, parents) in graph.parents.iter().enumerate() {
            let label = if i == graph.target.0 { "y".to_string() } else { format!("x{}", i + 1) };
            let from: Vec<String> = parents.iter().map(|p| format!("x{}", p.0 + 1)).collect();
            let mapper = cfg.concept.pins.get(&i).map(pin_text).unwrap_or_else(|| "random".into());
            if from.is_empty() {
                out.push_str(&format!("  {label} = {mapper}\n"));
            } else {
                out.push_str(&format!("  {label} = {mapper} of ({})\n", from.join(", ")));
            }
        }
    }
    if let Some(dag) = &cfg.dag {
        if cfg.graph.is_none() {
            out.push_str(&format!(
                "  random graph: {} features, {} roots, {}-{} parents per node\n",
                dag.features, dag.roots, dag.min_parents, dag.max_parents
            ));
        }
    }
    if let Some(k) = cfg.feature_subsample {
        out.push_str(&format!("  emits {k} subsampled features\n"));
    }
    if let Some(r) = &cfg.random_drift {
        out.push_str(&format!(
            "  {} random shift events, drawn per seed\n",
            r.concepts.saturating_sub(1)
        ));
    }
    out.push_str(&format!("{} shift events\n", cfg.schedule.events.len()));
    for e in &cfg.schedule.events {
        out.push_str("  ");
        out.push_str(&match &cfg.graph {
            Some(g) => e.describe_with(|n| if n == g.target { "y".into() } else { format!("x{}", n.0 + 1) }),
            None => e.describe(),
        });
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_preset_builds() {
        for n in NAMES {
            let cfg = preset_f64(n).unwrap();
            cfg.validate().unwrap();
            assert!(summary(n).is_ok());
        }
        assert!(matches!(preset_f64("bogus"), Err(Error::UnknownPreset(_))));
        assert!(matches!(describe("dataset9"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn f32_preset_matches() {
        let a: GeneratorConfig<f32> = preset("dataset2").unwrap();
        assert_eq!(a.schedule.events.len(), 4);
        assert_eq!(a.dataset_size, 2500);
    }

    #[test]
    fn description_mentions_bindings() {
        let d = describe("dataset1").unwrap();
        assert!(d.contains("x3 = learned-mlp/sine"));
        assert!(d.contains("x5 = sgd-linear/checkerboard"));
        assert!(d.contains("4 shift events"));
    }
}
