//! Wilcoxon exact path against a brute-force walk over every sign vector.

use parley_evalstats::{wilcoxon_signed_rank, Alternative, WilcoxonMethod};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Average 1-based rank of each magnitude, by counting.
fn ranks(m: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|&x| {
            let below = m.iter().filter(|&&y| y < x).count() as f64;
            let equal = m.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

struct Oracle {
    w_plus: f64,
    w_minus: f64,
    greater: f64,
    less: f64,
    two_sided: f64,
}

fn enumerate(d: &[f64]) -> Oracle {
    let nz: Vec<f64> = d.iter().copied().filter(|&x| x != 0.0).collect();
    let r = ranks(&nz.iter().map(|x| x.abs()).collect::<Vec<_>>());
    let observed: f64 = nz.iter().zip(&r).filter(|(x, _)| **x > 0.0).fold(0.0, |a, (_, r)| a + r);
    let total = r.iter().fold(0.0, |a, b| a + b);
    let n = nz.len();
    let (mut ge, mut le) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w = (0..n).filter(|i| mask >> i & 1 == 1).fold(0.0, |a, i| a + r[i]);
        ge += u64::from(w >= observed);
        le += u64::from(w <= observed);
    }
    let all = (1u64 << n) as f64;
    let (greater, less) = (ge as f64 / all, le as f64 / all);
    Oracle {
        w_plus: observed,
        w_minus: total - observed,
        greater,
        less,
        two_sided: (2.0 * greater.min(less)).min(1.0),
    }
}

fn fixture(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.random_range(1..=10);
    let tied = rng.random_bool(0.5);
    let mut d: Vec<f64> = (0..n)
        .map(|_| {
            if tied {
                // small integer grid so magnitudes repeat and zeros appear
                f64::from(rng.random_range(-4i32..=4))
            } else {
                rng.random_range(-10.0..10.0)
            }
        })
        .collect();
    if d.iter().all(|&x| x == 0.0) {
        d[0] = 1.0;
    }
    d
}

#[test]
fn exact_path_equals_enumeration_on_50_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5157);
    for case in 0..50 {
        let d = fixture(&mut rng);
        let zeros = vec![0.0; d.len()];
        let o = enumerate(&d);
        for (alt, p) in [
            (Alternative::TwoSided, o.two_sided),
            (Alternative::Greater, o.greater),
            (Alternative::Less, o.less),
        ] {
            let w = wilcoxon_signed_rank(&d, &zeros, alt).unwrap();
            assert_eq!(w.method, WilcoxonMethod::Exact);
            assert_eq!(w.w_plus.to_bits(), o.w_plus.to_bits(), "case {case}: {d:?}");
            assert_eq!(w.w_minus.to_bits(), o.w_minus.to_bits(), "case {case}");
            assert!((w.p - p).abs() <= 1e-12, "case {case} {alt:?}: {} vs {p}", w.p);
        }
    }
}

#[test]
fn five_positive_differences() {
    let d = [0.5, 1.5, 2.0, 3.0, 4.5];
    let w = wilcoxon_signed_rank(&d, &[0.0; 5], Alternative::Greater).unwrap();
    assert_eq!(w.p, 1.0 / 32.0);
    assert_eq!(w.w_plus, 15.0);
}

#[test]
fn ten_differences_bit_for_bit() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let d: Vec<f64> = (0..10).map(|_| rng.random_range(-3.0..3.0)).collect();
    let o = enumerate(&d);
    let w = wilcoxon_signed_rank(&d, &[0.0; 10], Alternative::TwoSided).unwrap();
    assert_eq!(w.p.to_bits(), o.two_sided.to_bits());
}

#[test]
fn zero_differences_only() {
    assert!(wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0], Alternative::TwoSided).is_err());
}
