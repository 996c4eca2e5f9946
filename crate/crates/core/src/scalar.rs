//! Scalar abstraction shared by every module.
//!
//! Geometry and stop-loss algebra are written against [`Scalar`], which is
//! implemented for `f32` and `f64`. Probabilities used by the identification
//! algorithms have their own trait, [`Probability`], so that they can be
//! carried as exact rationals.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, NumAssign, One, Signed, ToPrimitive, Zero};

/// Real scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant (tolerances, literals).
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Positive part `max(x, 0)`.
#[inline]
pub fn pos<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}

/// Probability mass that can be compared, summed and split.
///
/// Floats compare within a tolerance; rationals compare exactly and ignore it.
pub trait Probability:
    Clone + Debug + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Zero + One + Send + Sync
{
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;

    fn to_f64(&self) -> f64;

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
}

impl Probability for f64 {
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Probability for f32 {
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        ((self - other).abs() as f64) <= tol
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl<I> Probability for Ratio<I>
where
    I: Integer + Signed + Clone + Debug + ToPrimitive + Send + Sync,
{
    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn to_f64(&self) -> f64 {
        self.numer().to_f64().unwrap_or(f64::NAN) / self.denom().to_f64().unwrap_or(f64::NAN)
    }
}

/// Parses `"p/q"` or an integer into a rational.
pub fn parse_ratio(s: &str) -> Option<Ratio<i64>> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().ok()?;
            let q: i64 = q.trim().parse().ok()?;
            if q == 0 {
                None
            } else {
                Some(Ratio::new(p, q))
            }
        }
        None => s.parse::<i64>().ok().map(Ratio::from_integer),
    }
}
