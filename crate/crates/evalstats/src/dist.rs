//! Cumulative distribution functions used by the significance tests.

use parley_core::scalar::Real;

use crate::special::{beta_inc, erfc};

fn half<T: Real>() -> T {
    T::constant(0.5)
}

pub fn normal_cdf<T: Real>(z: T) -> T {
    half::<T>() * erfc(-z / T::constant(std::f64::consts::SQRT_2))
}

/// Upper tail `P(Z > z)`, accurate far into the tail.
pub fn normal_sf<T: Real>(z: T) -> T {
    half::<T>() * erfc(z / T::constant(std::f64::consts::SQRT_2))
}

/// Student t CDF with `df` degrees of freedom.
pub fn t_cdf<T: Real>(t: T, df: T) -> T {
    let tail = half::<T>() * beta_inc(df * half(), half(), df / (df + t * t));
    if t > T::zero() {
        T::one() - tail
    } else {
        tail
    }
}

/// `P(T > t)`.
pub fn t_sf<T: Real>(t: T, df: T) -> T {
    t_cdf(-t, df)
}

/// Fisher F CDF with `(d1, d2)` degrees of freedom.
pub fn f_cdf<T: Real>(x: T, d1: T, d2: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    beta_inc(d1 * half(), d2 * half(), d1 * x / (d1 * x + d2))
}

/// `P(F > x)`, computed from the complementary beta so small p-values keep precision.
pub fn f_sf<T: Real>(x: T, d1: T, d2: T) -> T {
    if x <= T::zero() {
        return T::one();
    }
    beta_inc(d2 * half(), d1 * half(), d2 / (d2 + d1 * x))
}
