//! Serial-correlation and distribution-shift diagnostics.

use rand::seq::index;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::rng::{substream, Substream};
use crate::scalar::{mean_std, Real};

pub const DEFAULT_LAGS: usize = 20;
pub const SIGNIFICANCE_LEVELS: [f64; 3] = [0.05, 0.01, 0.001];
pub const BANDWIDTH_SUBSAMPLE: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult<F> {
    /// Index `k` holds the lag-`k` autocorrelation; index 0 is 1.
    pub correlations: Vec<F>,
    pub n: usize,
}

/// Biased sample autocorrelation up to `max_lag`.
pub fn acf<F: Real>(series: &[F], max_lag: usize) -> Result<AcfResult<F>> {
    let n = series.len();
    if n <= max_lag {
        return Err(Error::Insufficient(format!(
            "series of length {n} is too short for {max_lag} lags"
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("series".into()));
    }
    let (mean, _) = mean_std(series);
    let dev: Vec<F> = series.iter().map(|&v| v - mean).collect();
    let denom = dev.iter().fold(F::zero(), |a, &d| a + d * d);
    if !(denom > F::zero()) {
        return Err(Error::Degenerate("constant series".into()));
    }
    let correlations = (0..=max_lag)
        .map(|k| {
            if k == 0 {
                return F::one();
            }
            let s = dev[..n - k]
                .iter()
                .zip(&dev[k..])
                .fold(F::zero(), |a, (&x, &y)| a + x * y);
            (s / denom).max(-F::one()).min(F::one())
        })
        .collect();
    Ok(AcfResult { correlations, n })
}

/// Upper tail of the chi-square distribution with `k` degrees of freedom.
pub fn chi_square_upper_tail(x: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("degrees of freedom must be positive"));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::param(format!("chi-square statistic must be non-negative, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    Ok(gamma_ur(k as f64 / 2.0, x / 2.0).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LjungBoxResult {
    pub q: f64,
    pub lags: usize,
    pub p_value: f64,
    /// `(level, rejected)` for each of [`SIGNIFICANCE_LEVELS`].
    pub reject_at: Vec<(f64, bool)>,
}

impl LjungBoxResult {
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Ljung-Box portmanteau test over `lags` lags.
pub fn ljung_box<F: Real>(series: &[F], lags: usize) -> Result<LjungBoxResult> {
    let n = series.len();
    if lags == 0 {
        return Err(Error::param("at least one lag is required"));
    }
    if n <= lags + 1 {
        return Err(Error::Insufficient(format!(
            "series of length {n} is too short for {lags} lags"
        )));
    }
    let r = acf(series, lags)?;
    let nf = n as f64;
    let q = nf
        * (nf + 2.0)
        * (1..=lags)
            .map(|k| r.correlations[k].as_f64().powi(2) / (nf - k as f64))
            .sum::<f64>();
    let p_value = chi_square_upper_tail(q, lags)?;
    Ok(LjungBoxResult {
        q,
        lags,
        p_value,
        reject_at: SIGNIFICANCE_LEVELS.iter().map(|&a| (a, p_value < a)).collect(),
    })
}

fn sq_dist<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .fold(F::zero(), |s, (&x, &y)| s + (x - y) * (x - y))
}

fn kernel_mean<F: Real>(a: &[Vec<F>], b: &[Vec<F>], inv: F) -> F {
    let mut total = F::zero();
    for x in a {
        let mut row = F::zero();
        for y in b {
            row = row + (-sq_dist(x, y) * inv).exp();
        }
        total = total + row;
    }
    total / (F::from_count(a.len()) * F::from_count(b.len()))
}

fn check_batches<F: Real>(a: &[Vec<F>], b: &[Vec<F>], bandwidth: F) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let d = a[0].len();
    if let Some(r) = a.iter().chain(b).find(|r| r.len() != d) {
        return Err(Error::Arity {
            expected: d,
            got: r.len(),
        });
    }
    if !(bandwidth > F::zero()) || !bandwidth.is_finite() {
        return Err(Error::param("bandwidth must be positive"));
    }
    Ok(())
}

/// Biased squared MMD with kernel `exp(-|u - v|^2 / (2 bandwidth^2))`.
pub fn mmd2_rbf<F: Real>(a: &[Vec<F>], b: &[Vec<F>], bandwidth: F) -> Result<F> {
    check_batches(a, b, bandwidth)?;
    let inv = F::one() / (F::lit(2.0) * bandwidth * bandwidth);
    let v = kernel_mean(a, a, inv) + kernel_mean(b, b, inv) - F::lit(2.0) * kernel_mean(a, b, inv);
    Ok(v.max(F::zero()))
}

/// Median pairwise Euclidean distance over at most [`BANDWIDTH_SUBSAMPLE`] rows chosen
/// with the analysis substream of `seed`.
pub fn median_bandwidth<F: Real>(rows: &[Vec<F>], seed: u64) -> Result<F> {
    if rows.len() < 2 {
        return Err(Error::Insufficient("need two rows for a bandwidth".into()));
    }
    let picked: Vec<&Vec<F>> = if rows.len() > BANDWIDTH_SUBSAMPLE {
        let mut idx = index::sample(&mut substream(seed, Substream::Analysis), rows.len(), BANDWIDTH_SUBSAMPLE).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| &rows[i]).collect()
    } else {
        rows.iter().collect()
    };
    let mut d: Vec<F> = Vec::with_capacity(picked.len() * (picked.len() - 1) / 2);
    for i in 0..picked.len() {
        for j in i + 1..picked.len() {
            d.push(sq_dist(picked[i], picked[j]).sqrt());
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let m = d.len();
    let med = if m % 2 == 1 {
        d[m / 2]
    } else {
        (d[m / 2 - 1] + d[m / 2]) / F::lit(2.0)
    };
    if med > F::zero() {
        Ok(med)
    } else {
        Err(Error::Degenerate("all sampled rows coincide".into()))
    }
}

/// Standardizes each column to zero mean and unit population variance. Constant
/// columns are centered only.
pub fn standardize_columns<F: Real>(rows: &[Vec<F>]) -> Vec<Vec<F>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let d = rows[0].len();
    let stats: Vec<(F, F)> = (0..d)
        .map(|j| mean_std(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect();
    rows.iter()
        .map(|r| {
            r.iter()
                .zip(&stats)
                .map(|(&v, &(m, s))| if s > F::zero() { (v - m) / s } else { v - m })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmdMatrix<F> {
    pub batch_size: usize,
    pub bandwidth: F,
    /// `values[i][j]` compares batches `i` and `j`.
    pub values: Vec<Vec<F>>,
}

impl<F: Real> MmdMatrix<F> {
    pub fn n_batches(&self) -> usize {
        self.values.len()
    }
}

/// Squared MMD between every pair of consecutive, non-overlapping batches. Columns
/// are standardized over the whole input first; a trailing partial batch is dropped.
/// Rows are whatever joint representation the caller wants compared (append the label
/// column for `P(X, y)`).
pub fn mmd_heatmap<F: Real>(rows: &[Vec<F>], batch_size: usize, seed: u64) -> Result<MmdMatrix<F>> {
    if batch_size == 0 {
        return Err(Error::param("batch size must be positive"));
    }
    if rows.len() < 2 * batch_size {
        return Err(Error::Insufficient(format!(
            "{} rows cannot form two batches of {batch_size}",
            rows.len()
        )));
    }
    let d = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::Arity {
            expected: d,
            got: r.len(),
        });
    }
    let z = standardize_columns(rows);
    let bandwidth = median_bandwidth(&z, seed)?;
    let inv = F::one() / (F::lit(2.0) * bandwidth * bandwidth);
    let batches: Vec<&[Vec<F>]> = z.chunks_exact(batch_size).collect();
    let nb = batches.len();
    let self_terms: Vec<F> = batches.iter().map(|b| kernel_mean(b, b, inv)).collect();
    let pairs: Vec<(usize, usize)> = (0..nb).flat_map(|i| (i + 1..nb).map(move |j| (i, j))).collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(pairs.len()).max(1);
    let chunk = pairs.len().div_ceil(workers);
    let cross: Vec<F> = std::thread::scope(|s| {
        let handles: Vec<_> = pairs
            .chunks(chunk.max(1))
            .map(|part| {
                let batches = &batches;
                s.spawn(move || {
                    part.iter()
                        .map(|&(i, j)| kernel_mean(batches[i], batches[j], inv))
                        .collect::<Vec<F>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("mmd worker panicked"))
            .collect()
    });
    let mut values = vec![vec![F::zero(); nb]; nb];
    for (&(i, j), &c) in pairs.iter().zip(&cross) {
        let v = (self_terms[i] + self_terms[j] - F::lit(2.0) * c).max(F::zero());
        values[i][j] = v;
        values[j][i] = v;
    }
    Ok(MmdMatrix {
        batch_size,
        bandwidth,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acf_lag_zero_and_alternating() {
        let s: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = acf(&s, 3).unwrap();
        assert_eq!(r.correlations[0], 1.0);
        assert!((r.correlations[1] + 0.999).abs() <= 1e-3);
        assert!(matches!(acf(&[2.0_f64; 50], 3), Err(Error::Degenerate(_))));
        assert!(acf(&[1.0_f64, 2.0], 2).is_err());
    }

    #[test]
    fn chi_square_closed_forms() {
        assert_eq!(chi_square_upper_tail(0.0, 7).unwrap(), 1.0);
        let x = 2.0 * 2f64.ln();
        assert!((chi_square_upper_tail(x, 2).unwrap() - 0.5).abs() < 1e-12);
        assert!(chi_square_upper_tail(-1.0, 2).is_err());
        assert!(chi_square_upper_tail(1.0, 0).is_err());
    }

    #[test]
    fn mmd_identities() {
        let a = vec![vec![0.0_f64, 1.0], vec![2.0, -1.0], vec![0.5, 0.5]];
        assert_eq!(mmd2_rbf(&a, &a, 1.0).unwrap(), 0.0);
        let v = mmd2_rbf(&[vec![0.0_f64]], &[vec![3.0]], 2.0).unwrap();
        assert!((v - 2.0 * (1.0 - (-9.0f64 / 8.0).exp())).abs() < 1e-12);
        assert!(mmd2_rbf(&a, &[vec![1.0]], 1.0).is_err());
    }

    #[test]
    fn heatmap_shape_and_duplicates() {
        let mut rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 * 0.37).sin(), i as f64 % 3.0]).collect();
        let dup: Vec<Vec<f64>> = rows[..10].to_vec();
        rows.extend(dup);
        let m = mmd_heatmap(&rows, 10, 1).unwrap();
        assert_eq!(m.n_batches(), 5);
        for i in 0..5 {
            assert_eq!(m.values[i][i], 0.0);
            for j in 0..5 {
                assert_eq!(m.values[i][j], m.values[j][i]);
                assert!(m.values[i][j] >= 0.0);
            }
        }
        assert_eq!(m.values[0][4], 0.0);
        assert!(mmd_heatmap(&rows[..15], 10, 1).is_err());
    }
}
