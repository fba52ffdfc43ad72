//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All models, temporal state and statistics are written against [`Real`], which is
//! implemented for `f32` and `f64`. Sampling goes through the trait so generic code
//! never needs `StandardNormal: Distribution<F>` style bounds at each call site.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::de::DeserializeOwned;
use serde::Serialize;

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot hold at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Uniform draw from `[0, 1)`.
    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Standard normal draw.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform draw from `[low, high)`; returns `low` when the interval is empty.
    #[inline]
    fn uniform<R: Rng + ?Sized>(rng: &mut R, low: Self, high: Self) -> Self {
        low + (high - low) * Self::unit(rng)
    }
}

impl Real for f32 {
    #[inline]
    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f32>()
    }

    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Real for f64 {
    #[inline]
    fn unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f64>()
    }

    #[inline]
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

/// Population mean and standard deviation of a slice. Empty input yields `(0, 0)`.
pub fn mean_std<F: Real>(values: &[F]) -> (F, F) {
    if values.is_empty() {
        return (F::zero(), F::zero());
    }
    let n = F::from_count(values.len());
    let mean = values.iter().fold(F::zero(), |acc, &v| acc + v) / n;
    let var = values
        .iter()
        .fold(F::zero(), |acc, &v| acc + (v - mean) * (v - mean))
        / n;
    (mean, var.sqrt())
}

/// Linear interpolation that lands exactly on `end` when `fraction == 1`.
#[inline]
pub fn lerp<F: Real>(start: F, end: F, fraction: F) -> F {
    if fraction >= F::one() {
        end
    } else if fraction <= F::zero() {
        start
    } else {
        (F::one() - fraction) * start + fraction * end
    }
}
