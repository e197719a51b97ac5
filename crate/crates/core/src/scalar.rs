//! Pixel scalar abstraction.
//!
//! Every raster kernel is written once against [`Scalar`] so the same code
//! runs on `f64` (the default), `f32`, and exact rationals. The rational
//! instantiation is what lets the illumination-invariance properties be
//! checked as true equalities instead of within a rounding tolerance.

use std::fmt::Debug;

use num_rational::Rational64;
use num_traits::{Num, ToPrimitive};

/// Real-valued pixel intensity.
pub trait Scalar: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {
    /// Converts a decimal constant such as a threshold or luma weight.
    fn lit(value: f64) -> Self;

    fn from_count(n: usize) -> Self;

    fn to_f64(self) -> f64;

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn lit(value: f64) -> Self {
        value
    }

    fn from_count(n: usize) -> Self {
        n as f64
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn lit(value: f64) -> Self {
        value as f32
    }

    fn from_count(n: usize) -> Self {
        n as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for Rational64 {
    /// Finds the shortest power-of-ten denominator (up to 10^9) that
    /// represents `value`, so `0.03` becomes exactly `3/100`.
    fn lit(value: f64) -> Self {
        assert!(value.is_finite(), "non-finite literal {value}");
        let mut scale: i64 = 1;
        for _ in 0..=9 {
            let scaled = value * scale as f64;
            let rounded = scaled.round();
            if (scaled - rounded).abs() <= 1e-9 * scaled.abs().max(1.0) {
                return Rational64::new(rounded as i64, scale);
            }
            scale *= 10;
        }
        Rational64::new((value * 1e9).round() as i64, 1_000_000_000)
    }

    fn from_count(n: usize) -> Self {
        Rational64::from_integer(n as i64)
    }

    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}
