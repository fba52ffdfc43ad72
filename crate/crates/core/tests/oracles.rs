//! Library results checked against values computed directly in the test.

use scmstream::analysis::{acf, chi_square_upper_tail, ljung_box, mmd2_rbf};
use scmstream::eval::{
    drift_response, mae_prequential, ConstantRegressor, EventWindow, Metric, PrequentialCurve, PrequentialOptions,
};
use scmstream::generator::{FeatureValue, Instance, Label};
use scmstream::rng::seeded;
use rand::Rng;

/// Upper regularized gamma for even degrees of freedom: a finite Poisson sum.
fn chi_square_tail_even(x: f64, k: usize) -> f64 {
    assert!(k % 2 == 0);
    let h = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..k / 2 {
        term *= h / j as f64;
        sum += term;
    }
    (-h).exp() * sum
}

#[test]
fn chi_square_tail_matches_poisson_sum() {
    for k in [2, 4, 10, 20, 40] {
        for x in [0.5, 3.0, 12.0, 31.41, 60.0] {
            let got = chi_square_upper_tail(x, k).unwrap();
            let want = chi_square_tail_even(x, k);
            assert!((got - want).abs() < 1e-10, "k={k} x={x}: {got} vs {want}");
        }
    }
    // tabulated 95th percentile of chi-square with 20 degrees of freedom
    assert!((chi_square_upper_tail(31.410, 20).unwrap() - 0.05).abs() < 1e-3);
}

fn direct_acf(x: &[f64], k: usize) -> f64 {
    let n = x.len();
    let m = x.iter().sum::<f64>() / n as f64;
    let den: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    let num: f64 = (0..n - k).map(|t| (x[t] - m) * (x[t + k] - m)).sum();
    num / den
}

fn series(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    let mut prev = 0.0;
    (0..n)
        .map(|_| {
            prev = 0.6 * prev + rng.random_range(-1.0..1.0);
            prev
        })
        .collect()
}

#[test]
fn acf_and_ljung_box_match_direct_sums() {
    let x = series(300, 5);
    let r = acf(&x, 10).unwrap();
    assert_eq!(r.correlations[0], 1.0);
    for k in 1..=10 {
        assert!((r.correlations[k] - direct_acf(&x, k)).abs() < 1e-12);
    }
    let n = x.len() as f64;
    let q: f64 = (1..=10).map(|k| direct_acf(&x, k).powi(2) / (n - k as f64)).sum::<f64>() * n * (n + 2.0);
    let lb = ljung_box(&x, 10).unwrap();
    assert!((lb.q - q).abs() < 1e-9 * q);
    assert!((lb.p_value - chi_square_tail_even(q, 10)).abs() < 1e-10);
}

#[test]
fn mmd_of_singletons_is_closed_form() {
    let a = vec![vec![0.0, 1.0]];
    let b = vec![vec![3.0, -1.0]];
    for gamma in [0.5, 1.0, 4.0] {
        let d2: f64 = 9.0 + 4.0;
        let want = 2.0 * (1.0 - (-d2 / (2.0 * gamma * gamma)).exp());
        assert!((mmd2_rbf(&a, &b, gamma).unwrap() - want).abs() < 1e-12);
    }
    assert_eq!(mmd2_rbf(&a, &a, 1.0).unwrap(), 0.0);
}

#[test]
fn step_curve_response() {
    let mut values: Vec<f64> = vec![0.9; 50];
    values.extend(vec![0.5; 50]);
    values.extend(vec![0.8; 50]);
    let n = values.len();
    let curve = PrequentialCurve {
        metric: Metric::Accuracy,
        window: 1,
        initial_train: 0,
        t: (0..n as u64).collect(),
        scores: values.clone(),
        values,
    };
    let ev = [EventWindow {
        start: 50,
        width: 1,
        concept_end: 149,
    }];
    let r = drift_response(&curve, &ev, 10).unwrap();
    assert!((r[0].drop - 0.4).abs() < 1e-12);
    assert!((r[0].recovery - 0.75).abs() < 1e-12);
}

#[test]
fn constant_zero_regressor_mae_is_mean_abs_label() {
    let ys: Vec<f64> = series(400, 9);
    let stream: Vec<Instance<f64>> = ys
        .iter()
        .enumerate()
        .map(|(t, &y)| Instance {
            t: t as u64,
            features: vec![FeatureValue::Real(t as f64)],
            label: Label::Value(y),
            meta: Default::default(),
        })
        .collect();
    let opts = PrequentialOptions {
        window: 50,
        warmup: 100,
        ..Default::default()
    };
    let curve = mae_prequential(stream, &mut ConstantRegressor { value: 0.0 }, &opts).unwrap();
    for t in [149u64, 200, 399] {
        let lo = t as usize + 1 - 50;
        let want = ys[lo..=t as usize].iter().map(|y| y.abs()).sum::<f64>() / 50.0;
        assert!((curve.value_at(t).unwrap() - want).abs() < 1e-12, "t={t}");
    }
}
