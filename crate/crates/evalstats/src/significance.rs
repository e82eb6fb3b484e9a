//! Paired t, Wilcoxon signed-rank, Holm step-down and Brown-Forsythe.

use parley_core::scalar::{Real, Scalar};
use serde::Serialize;

use crate::dist::{f_sf, normal_cdf, normal_sf, t_cdf, t_sf};
use crate::error::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    #[default]
    TwoSided,
    /// `x` tends to exceed `y`.
    Greater,
    /// `x` tends to fall below `y`.
    Less,
}

fn differences<T: Scalar>(x: &[T], y: &[T]) -> Result<Vec<T>, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    Ok(x.iter().zip(y).map(|(&a, &b)| a - b).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTest<T> {
    pub t: T,
    pub df: T,
    pub p: T,
}

/// Dependent-samples t test on `x - y`.
pub fn paired_t<T: Real>(x: &[T], y: &[T], alt: Alternative) -> Result<TTest<T>, StatsError> {
    let d = differences(x, y)?;
    let n = d.len();
    if n < 2 {
        return Err(StatsError::TooFew { needed: 2, got: n });
    }
    let nt = T::from_count(n);
    let mean = d.iter().fold(T::zero(), |a, &b| a + b) / nt;
    let var = d.iter().fold(T::zero(), |a, &b| a + (b - mean) * (b - mean)) / (nt - T::one());
    if var == T::zero() {
        return Err(StatsError::ZeroVariance);
    }
    let t = mean / (var / nt).sqrt();
    let df = nt - T::one();
    let p = match alt {
        Alternative::TwoSided => {
            let two = T::one() + T::one();
            (two * t_sf(t.abs(), df)).min(T::one())
        }
        Alternative::Greater => t_sf(t, df),
        Alternative::Less => t_cdf(t, df),
    };
    Ok(TTest { t, df, p })
}

/// Average ranks (1-based) of `values` after sorting by `key`, doubled so that
/// half-integer tie ranks stay integral.
fn doubled_ranks<T: PartialOrd + Copy>(values: &[T]) -> (Vec<u64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("comparable values"));
    let mut ranks = vec![0u64; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j averaged, doubled: (i + 1 + j)
        let r = (i + 1 + j) as u64;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
}

pub const WILCOXON_EXACT_MAX_N: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Wilcoxon {
    /// Number of non-zero differences.
    pub n: usize,
    /// Rank sum of positive differences.
    pub w_plus: f64,
    pub w_minus: f64,
    /// Standardized statistic, reported on the normal path.
    pub z: Option<f64>,
    pub p: f64,
    pub method: WilcoxonMethod,
}

/// Number of sign assignments giving each doubled rank sum `s = 0..=Σ ranks`.
pub fn signed_rank_counts(doubled: &[u64]) -> Vec<u64> {
    let total: u64 = doubled.iter().sum();
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in doubled {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

/// Signed-rank test on `x - y`. Zero differences are dropped and tied magnitudes
/// share their average rank. Up to [`WILCOXON_EXACT_MAX_N`] non-zero differences
/// the p-value comes from the exact null distribution of `W+` over all `2^n` sign
/// assignments; above that, from the normal approximation with continuity and tie
/// corrections.
pub fn wilcoxon_signed_rank<T: Real>(x: &[T], y: &[T], alt: Alternative) -> Result<Wilcoxon, StatsError> {
    let d: Vec<f64> = differences(x, y)?
        .into_iter()
        .map(|v| v.to_f64().expect("finite difference"))
        .filter(|v| *v != 0.0)
        .collect();
    let n = d.len();
    if n == 0 {
        return Err(StatsError::AllZeroDifferences);
    }
    let magnitudes: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let (ranks, ties) = doubled_ranks(&magnitudes);
    let plus2: u64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let total2: u64 = ranks.iter().sum();
    let w_plus = plus2 as f64 / 2.0;
    let w_minus = (total2 - plus2) as f64 / 2.0;

    if n <= WILCOXON_EXACT_MAX_N {
        let counts = signed_rank_counts(&ranks);
        let all = (1u64 << n) as f64;
        let upper = counts[plus2 as usize..].iter().sum::<u64>() as f64 / all;
        let lower = counts[..=plus2 as usize].iter().sum::<u64>() as f64 / all;
        let p = match alt {
            Alternative::TwoSided => (2.0 * upper.min(lower)).min(1.0),
            Alternative::Greater => upper,
            Alternative::Less => lower,
        };
        return Ok(Wilcoxon {
            n,
            w_plus,
            w_minus,
            z: None,
            p,
            method: WilcoxonMethod::Exact,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    let stat = match alt {
        Alternative::TwoSided => w_plus.min(w_minus),
        _ => w_plus,
    };
    // one-sided corrections always shrink toward the null
    let correction = match alt {
        Alternative::TwoSided => 0.5 * (stat - mean).signum() * f64::from(u8::from(stat != mean)),
        Alternative::Greater => 0.5,
        Alternative::Less => -0.5,
    };
    let z = (stat - mean - correction) / var.sqrt();
    let p = match alt {
        Alternative::TwoSided => (2.0 * normal_sf(z.abs())).min(1.0),
        Alternative::Greater => normal_sf(z),
        Alternative::Less => normal_cdf(z),
    };
    Ok(Wilcoxon {
        n,
        w_plus,
        w_minus,
        z: Some(z),
        p,
        method: WilcoxonMethod::Normal,
    })
}

/// Holm step-down adjustment; output is in input order.
pub fn holm_correct<T: Scalar>(pvalues: &[T]) -> Vec<T> {
    let m = pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvalues[a].partial_cmp(&pvalues[b]).expect("comparable p-values"));
    let mut out = vec![T::zero(); m];
    let mut running = T::zero();
    for (i, &k) in order.iter().enumerate() {
        let scaled = T::from_count(m - i) * pvalues[k];
        running = parley_core::scalar::max_of(running, scaled);
        out[k] = parley_core::scalar::min_of(running, T::one());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrownForsythe<T> {
    pub f: T,
    pub df_between: T,
    pub df_within: T,
    pub p: T,
}

fn median<T: Real>(xs: &[T]) -> T {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("comparable values"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / (T::one() + T::one())
    }
}

/// One-way ANOVA on absolute deviations from each group's median. When every
/// deviation is zero the statistic is defined as 0 with p = 1.
pub fn brown_forsythe<T: Real>(groups: &[Vec<T>]) -> Result<BrownForsythe<T>, StatsError> {
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::TooFew { needed: 2, got: k });
    }
    if let Some(smallest) = groups.iter().map(Vec::len).min().filter(|&m| m == 0) {
        return Err(StatsError::TooFew { needed: 1, got: smallest });
    }
    let total: usize = groups.iter().map(Vec::len).sum();
    if total <= k {
        return Err(StatsError::TooFew { needed: k + 1, got: total });
    }
    let z: Vec<Vec<T>> = groups
        .iter()
        .map(|g| {
            let m = median(g);
            g.iter().map(|&x| (x - m).abs()).collect()
        })
        .collect();
    let mean = |v: &[T]| v.iter().fold(T::zero(), |a, &b| a + b) / T::from_count(v.len());
    let group_means: Vec<T> = z.iter().map(|g| mean(g)).collect();
    let all: Vec<T> = z.iter().flatten().copied().collect();
    let grand = mean(&all);
    let between = z
        .iter()
        .zip(&group_means)
        .fold(T::zero(), |a, (g, &m)| a + T::from_count(g.len()) * (m - grand) * (m - grand));
    let within = z.iter().zip(&group_means).fold(T::zero(), |a, (g, &m)| {
        g.iter().fold(a, |a, &x| a + (x - m) * (x - m))
    });
    let df_between = T::from_count(k - 1);
    let df_within = T::from_count(total - k);
    let (f, p) = if within == T::zero() {
        if between == T::zero() {
            (T::zero(), T::one())
        } else {
            (T::infinity(), T::zero())
        }
    } else {
        let f = (between / df_between) / (within / df_within);
        (f, f_sf(f, df_between, df_within))
    };
    Ok(BrownForsythe {
        f,
        df_between,
        df_within,
        p,
    })
}
