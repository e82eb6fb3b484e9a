//! Numeric traits the math kernels are written against.
//!
//! [`Scalar`] only asks for field operations and ordering, so anything built on it
//! also runs on exact rationals. [`Real`] adds the transcendental functions needed
//! for logarithms, square roots and distribution functions.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Num + Signed + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl<T> Scalar for T where
    T: Num + Signed + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
}

pub trait Real: Scalar + Float {
    /// Converts an `f64` constant. Panics only for types that cannot hold a finite `f64`.
    fn constant(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("constant representable")
    }
}

impl<T: Scalar + Float> Real for T {}

/// Smaller of two partially ordered values, preferring `a` on ties or NaN.
pub fn min_of<T: PartialOrd>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

pub fn max_of<T: PartialOrd>(a: T, b: T) -> T {
    if b > a {
        b
    } else {
        a
    }
}

pub fn clamp<T: PartialOrd>(x: T, lo: T, hi: T) -> T {
    min_of(max_of(x, lo), hi)
}
