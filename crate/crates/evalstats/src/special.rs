//! Special functions behind the distribution CDFs.
//!
//! - `ln_gamma`: Lanczos approximation (g = 7, nine coefficients) with the
//!   reflection formula below 1/2.
//! - `beta_inc`: regularized incomplete beta via the modified Lentz continued
//!   fraction, using the symmetry `I_x(a, b) = 1 - I_{1-x}(b, a)` past the mean.
//! - `gamma_p` / `gamma_q`: regularized incomplete gamma, series below `a + 1` and
//!   continued fraction above.

use parley_core::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const MAX_ITER: usize = 500;

fn c<T: Real>(x: f64) -> T {
    T::constant(x)
}

pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = c::<T>(0.5);
    if x < half {
        // Γ(x) Γ(1-x) = π / sin(πx)
        let pi = c::<T>(std::f64::consts::PI);
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = c::<T>(LANCZOS[0]);
    for (i, &k) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + c::<T>(k) / (x + T::from_count(i));
    }
    let t = x + c::<T>(LANCZOS_G) + half;
    c::<T>(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + half) * t.ln() - t + acc.ln()
}

fn tiny<T: Real>() -> T {
    T::min_positive_value() / T::epsilon()
}

/// Continued fraction for the incomplete beta, evaluated by modified Lentz.
fn beta_cf<T: Real>(a: T, b: T, x: T) -> T {
    let one = T::one();
    let fpmin = tiny::<T>();
    let eps = T::epsilon();
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let guard = |v: T| if v.abs() < fpmin { fpmin } else { v };
    let mut cc = one;
    let mut d = one / guard(one - qab * x / qap);
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = T::from_count(m);
        let m2 = m + m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one / guard(one + aa * d);
        cc = guard(one + aa / cc);
        h = h * d * cc;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one / guard(one + aa * d);
        cc = guard(one + aa / cc);
        let del = d * cc;
        h = h * del;
        if (del - one).abs() <= eps {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)` for `a, b > 0`.
pub fn beta_inc<T: Real>(a: T, b: T, x: T) -> T {
    let one = T::one();
    if x <= T::zero() {
        return T::zero();
    }
    if x >= one {
        return one;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (one - x).ln();
    let front = ln_front.exp();
    if x < (a + one) / (a + b + one + one) {
        front * beta_cf(a, b, x) / a
    } else {
        one - front * beta_cf(b, a, one - x) / b
    }
}

fn gamma_series<T: Real>(a: T, x: T) -> T {
    let mut ap = a;
    let mut del = T::one() / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap = ap + T::one();
        del = del * x / ap;
        sum = sum + del;
        if del.abs() < sum.abs() * T::epsilon() {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_cf<T: Real>(a: T, x: T) -> T {
    let one = T::one();
    let fpmin = tiny::<T>();
    let guard = |v: T| if v.abs() < fpmin { fpmin } else { v };
    let mut b = x + one - a;
    let mut cc = one / fpmin;
    let mut d = one / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let i = T::from_count(i);
        let an = -i * (i - a);
        b = b + one + one;
        d = one / guard(an * d + b);
        cc = guard(b + an / cc);
        let del = d * cc;
        h = h * del;
        if (del - one).abs() <= T::epsilon() {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else if x < a + T::one() {
        gamma_series(a, x)
    } else {
        T::one() - gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`, computed directly in
/// the tail.
pub fn gamma_q<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        T::one()
    } else if x < a + T::one() {
        T::one() - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

/// Complementary error function, `erfc(x) = Q(1/2, x²)` for `x ≥ 0`.
pub fn erfc<T: Real>(x: T) -> T {
    let two = T::one() + T::one();
    if x < T::zero() {
        two - erfc(-x)
    } else {
        gamma_q(c::<T>(0.5), x * x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_integers_and_half() {
        for (n, fact) in [(1.0, 1.0), (2.0, 1.0), (5.0, 24.0), (11.0, 3_628_800.0f64)] {
            assert!((ln_gamma(n) - fact.ln()).abs() < 1e-12, "{n}");
        }
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((ln_gamma(0.5) - sqrt_pi.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.1f64) - 2.252_712_651_734_206).abs() < 1e-12);
    }

    #[test]
    fn beta_inc_closed_forms() {
        // I_x(1, 1) = x, I_x(a, 1) = x^a, I_x(1, b) = 1 - (1-x)^b
        for x in [0.1, 0.35, 0.5, 0.9f64] {
            assert!((beta_inc(1.0, 1.0, x) - x).abs() < 1e-14);
            assert!((beta_inc(3.0, 1.0, x) - x.powi(3)).abs() < 1e-14);
            assert!((beta_inc(1.0, 4.0, x) - (1.0 - (1.0 - x).powi(4))).abs() < 1e-14);
        }
        assert_eq!(beta_inc(2.0, 3.0, 0.0f64), 0.0);
        assert_eq!(beta_inc(2.0, 3.0, 1.0f64), 1.0);
    }

    #[test]
    fn erfc_values() {
        assert!((erfc(0.0f64) - 1.0).abs() < 1e-15);
        assert!((erfc(1.0f64) - 0.157_299_207_050_285_13).abs() < 1e-14);
        assert!((erfc(-1.0f64) - 1.842_700_792_949_715).abs() < 1e-14);
        assert!((erfc(3.0f64) / 2.209_049_699_858_544e-5 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn f32_path() {
        assert!((ln_gamma(5.0f32) - 24f32.ln()).abs() < 1e-5);
        assert!((beta_inc(1.0f32, 1.0, 0.25) - 0.25).abs() < 1e-6);
    }
}
