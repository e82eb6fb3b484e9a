//! Inter-rater agreement: Cohen's kappa and the two-way random-effects ICC.

use parley_core::scalar::Scalar;

use crate::error::StatsError;

/// Cross-tabulates two raters' labels over `categories` (rows: rater A).
pub fn contingency_table(a: &[u8], b: &[u8], categories: &[u8]) -> Result<Vec<Vec<u64>>, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let k = categories.len();
    let mut table = vec![vec![0u64; k]; k];
    let pos = |x: u8| categories.iter().position(|&c| c == x);
    for (&x, &y) in a.iter().zip(b) {
        if let (Some(i), Some(j)) = (pos(x), pos(y)) {
            table[i][j] += 1;
        }
    }
    Ok(table)
}

/// `κ = (p_o - p_e) / (1 - p_e)`. Defined as 1 when `p_e = 1`, which forces
/// `p_o = 1`.
pub fn cohen_kappa<T: Scalar>(table: &[Vec<u64>]) -> Result<T, StatsError> {
    let k = table.len();
    if k == 0 || table.iter().any(|r| r.len() != k) {
        return Err(StatsError::NotSquare);
    }
    let total: u64 = table.iter().flatten().sum();
    if total == 0 {
        return Err(StatsError::EmptyTable);
    }
    let n = T::from_u64(total).expect("count fits scalar");
    let count = |x: u64| T::from_u64(x).expect("count fits scalar");
    let diag: u64 = (0..k).map(|i| table[i][i]).sum();
    let p_o = count(diag) / n;
    let mut p_e = T::zero();
    for i in 0..k {
        let row: u64 = table[i].iter().sum();
        let col: u64 = table.iter().map(|r| r[i]).sum();
        p_e = p_e + count(row) / n * (count(col) / n);
    }
    if p_e == T::one() {
        return Ok(T::one());
    }
    Ok((p_o - p_e) / (T::one() - p_e))
}

/// ICC(2,1): two-way random effects, absolute agreement, single rater, from the
/// mean-squares decomposition of an `n targets × k raters` matrix. All-equal
/// ratings are defined to have ICC 1.
pub fn icc_2_1<T: Scalar>(ratings: &[Vec<T>]) -> Result<T, StatsError> {
    let n = ratings.len();
    let k = ratings.first().map_or(0, Vec::len);
    if ratings.iter().any(|r| r.len() != k) {
        return Err(StatsError::Ragged);
    }
    if n < 2 || k < 2 {
        return Err(StatsError::TooFew { needed: 2, got: n.min(k) });
    }
    let nt = T::from_count(n);
    let kt = T::from_count(k);
    let sum = |it: &mut dyn Iterator<Item = T>| it.fold(T::zero(), |a, b| a + b);
    let grand = sum(&mut ratings.iter().flatten().copied()) / (nt * kt);
    let row_means: Vec<T> = ratings.iter().map(|r| sum(&mut r.iter().copied()) / kt).collect();
    let col_means: Vec<T> = (0..k)
        .map(|j| sum(&mut ratings.iter().map(|r| r[j])) / nt)
        .collect();
    let sq = |x: T| x * x;
    let ss_total = sum(&mut ratings.iter().flatten().map(|&x| sq(x - grand)));
    if ss_total == T::zero() {
        return Ok(T::one());
    }
    let ss_rows = kt * sum(&mut row_means.iter().map(|&m| sq(m - grand)));
    let ss_cols = nt * sum(&mut col_means.iter().map(|&m| sq(m - grand)));
    let ss_err = ss_total - ss_rows - ss_cols;
    let one = T::one();
    let ms_rows = ss_rows / (nt - one);
    let ms_cols = ss_cols / (kt - one);
    let ms_err = ss_err / ((nt - one) * (kt - one));
    let denom = ms_rows + (kt - one) * ms_err + kt * (ms_cols - ms_err) / nt;
    if denom == T::zero() {
        return Err(StatsError::Degenerate("ICC denominator is zero"));
    }
    Ok((ms_rows - ms_err) / denom)
}
