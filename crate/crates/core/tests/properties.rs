use proptest::prelude::*;

use scmstream::csvio::{read_table, write_instances};
use scmstream::drift::{
    apply_abrupt, draw_interventions, DriftRate, DriftSchedule, InterventionPolicy, Mechanism, RootChange, ShiftKind,
    ShiftSpec,
};
use scmstream::generator::{concept_spans, FeatureValue, GeneratorConfig, Instance, Label, StreamGenerator};
use scmstream::graph::DagParams;
use scmstream::presets::preset;
use scmstream::rng::seeded;
use scmstream::temporal::{ar_noise_step, ewma_step, TemporalParams};
use scmstream::{Concept, NodeMapper};

fn small(rows: u64) -> GeneratorConfig<f64> {
    let mut cfg = preset::<f64>("dataset1").unwrap();
    cfg.dataset_size = rows;
    cfg.schedule = DriftSchedule::default();
    cfg
}

fn concept(seed: u64) -> Concept<f64> {
    StreamGenerator::new(small(10), seed).unwrap().concept().clone()
}

fn spec(kind: ShiftKind, rate: DriftRate, start: u64, width: u64, actions: Vec<Mechanism<f64>>) -> ShiftSpec<f64> {
    ShiftSpec {
        kind,
        rate,
        start,
        width,
        actions,
        save_as: None,
        restore: None,
    }
}

fn collect(cfg: GeneratorConfig<f64>, seed: u64) -> Vec<Instance<f64>> {
    StreamGenerator::new(cfg, seed)
        .unwrap()
        .collect::<scmstream::Result<_>>()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn swap_is_an_involution(seed in 0u64..1000, a in 0usize..4, b in 0usize..4) {
        prop_assume!(a != b);
        let c = concept(seed);
        let swap = spec(ShiftKind::Severe, DriftRate::Abrupt, 1, 1, vec![Mechanism::SwapClasses { classes: Some([a, b]) }]);
        let mut twice = c.clone();
        apply_abrupt(&mut twice, &swap, &mut seeded(seed)).unwrap();
        prop_assert_ne!(&twice.class_permutation, &c.class_permutation);
        apply_abrupt(&mut twice, &swap, &mut seeded(seed)).unwrap();
        prop_assert_eq!(twice, c);
    }

    #[test]
    fn covariate_shift_only_touches_roots(seed in 0u64..1000, node in 0usize..2, scales in -3.0f64..3.0) {
        let c = concept(seed);
        let shift = spec(
            ShiftKind::Local,
            DriftRate::Abrupt,
            1,
            1,
            vec![Mechanism::RootParams { node: scmstream::graph::NodeId(node), change: RootChange::ShiftMean { scales } }],
        );
        let mut after = c.clone();
        apply_abrupt(&mut after, &shift, &mut seeded(seed)).unwrap();
        for (i, (x, y)) in c.mappers.iter().zip(&after.mappers).enumerate() {
            if i != node || !matches!(x, NodeMapper::Root(_)) {
                prop_assert_eq!(serde_json::to_string(x).unwrap(), serde_json::to_string(y).unwrap());
            }
        }
        prop_assert_eq!(&c.class_permutation, &after.class_permutation);
    }

    #[test]
    fn noise_without_innovation_decays_geometrically(rho in 0.0f64..1.0, start in -5.0f64..5.0, steps in 1usize..50) {
        let p = TemporalParams::new(1.0, rho, 0.0).unwrap();
        let mut rng = seeded(0);
        let mut n = start;
        for _ in 0..steps {
            n = ar_noise_step(n, &p, 1.0, &mut rng);
        }
        let expect = start * rho.powi(steps as i32);
        prop_assert!((n - expect).abs() <= 1e-12 * start.abs().max(1.0));
    }

    #[test]
    fn ewma_stays_between_inputs(z in -10.0f64..10.0, x in -10.0f64..10.0, alpha in 0.0f64..=1.0) {
        let out = ewma_step(z, x, alpha).unwrap();
        prop_assert!(out >= z.min(x) - 1e-12 && out <= z.max(x) + 1e-12);
    }

    #[test]
    fn stream_is_untouched_before_the_first_event(seed in 0u64..500, start in 20u64..150) {
        let plain = collect(small(200), seed);
        let mut cfg = small(200);
        cfg.schedule = DriftSchedule::new(vec![spec(
            ShiftKind::Severe,
            DriftRate::Abrupt,
            start,
            1,
            vec![Mechanism::SwapClasses { classes: Some([0, 1]) }],
        )])
        .unwrap();
        let drifted = collect(cfg, seed);
        for t in 0..start as usize {
            prop_assert_eq!(&plain[t], &drifted[t]);
        }
        for r in &drifted[start as usize..] {
            prop_assert_eq!(r.meta.concept, 1);
        }
    }

    #[test]
    fn gradual_window_mixes_only_inside(seed in 0u64..500, start in 20u64..100, width in 2u64..80) {
        let mut cfg = small(200);
        cfg.schedule = DriftSchedule::new(vec![spec(
            ShiftKind::Severe,
            DriftRate::Gradual,
            start,
            width,
            vec![Mechanism::SwapClasses { classes: Some([0, 1]) }],
        )])
        .unwrap();
        for r in collect(cfg, seed) {
            let expect: &[usize] = if r.t < start {
                &[0]
            } else if r.t < start + width {
                &[0, 1]
            } else {
                &[1]
            };
            prop_assert!(expect.contains(&r.meta.concept), "t={} concept={}", r.t, r.meta.concept);
        }
    }

    #[test]
    fn interventions_pick_one_to_three_non_target_nodes(seed in 0u64..1000) {
        let c = concept(seed % 50);
        let mut rng = seeded(seed);
        let forced = draw_interventions(&InterventionPolicy::with_probability(1.0), &c, &mut rng);
        prop_assert!((1..=3).contains(&forced.len()));
        prop_assert!(forced.windows(2).all(|w| w[0].0 < w[1].0));
        prop_assert!(forced.iter().all(|(n, v)| *n != c.target() && v.is_finite()));
        prop_assert!(draw_interventions(&InterventionPolicy::with_probability(0.0), &c, &mut rng).is_empty());
    }

    #[test]
    fn grid_labels_are_valid_classes(seed in 0u64..200) {
        let c = concept(seed);
        let grid = c.target_parent_grid(6, &mut seeded(seed)).unwrap();
        let k = c.n_classes().unwrap();
        prop_assert!(c.label_grid(&grid).unwrap().iter().all(|&y| y < k));
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec(
        (prop::collection::vec(prop::option::weighted(0.8, -1e6f64..1e6), 3), any::<bool>(), -1e3f64..1e3),
        1..40,
    )) {
        let instances: Vec<Instance<f64>> = rows
            .iter()
            .enumerate()
            .map(|(t, (f, _, y))| Instance {
                t: t as u64,
                features: f.iter().map(|v| v.map_or(FeatureValue::Missing, FeatureValue::Real)).collect(),
                label: Label::Value(*y),
                meta: Default::default(),
            })
            .collect();
        let mut buf = Vec::new();
        write_instances(&mut buf, 3, instances.iter().cloned().map(Ok)).unwrap();
        let table = read_table::<f64, _>(buf.as_slice()).unwrap();
        prop_assert_eq!(table.n_rows(), instances.len());
        for (r, (f, _, y)) in table.rows.iter().zip(&rows) {
            prop_assert_eq!(&r[..3], &f[..]);
            prop_assert_eq!(r[3], Some(*y));
        }
    }

    #[test]
    fn same_seed_same_stream(seed in 0u64..10_000) {
        let mut cfg = GeneratorConfig::<f64>::new(150, DagParams::new(6, 2, 1, 3));
        cfg.p_i = 0.3;
        cfg.p_m = 0.2;
        prop_assert_eq!(collect(cfg.clone(), seed), collect(cfg, seed));
    }
}

#[test]
fn concept_spans_tile_the_stream() {
    for name in ["dataset1", "dataset2", "dataset3"] {
        let cfg = preset::<f64>(name).unwrap();
        let spans = concept_spans(&cfg.schedule, cfg.dataset_size);
        assert_eq!(spans.first().unwrap().start, 0);
        assert_eq!(spans.last().unwrap().end, cfg.dataset_size);
        for (i, e) in cfg.schedule.events.iter().enumerate() {
            assert_eq!(spans[i + 1].start, e.start);
            let overlap = spans[i].end - spans[i + 1].start;
            assert_eq!(overlap, if e.width == 1 { 0 } else { e.width });
        }
    }
}

#[test]
fn single_precision_streams() {
    let rows: Vec<Instance<f32>> = StreamGenerator::new(preset::<f32>("dataset2").unwrap(), 4)
        .unwrap()
        .collect::<scmstream::Result<_>>()
        .unwrap();
    assert_eq!(rows.len(), 2500);
    assert!(rows.iter().all(|r| r.features.iter().all(|f| f.as_real().unwrap().is_finite())));
}
