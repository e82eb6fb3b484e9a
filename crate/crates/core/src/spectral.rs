//! Eigenvalue entropy of a set of embedding vectors.

use crate::scalar::Real;

/// Dense row-major symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    /// Gram matrix `G[i][j] = <v_i, v_j>`.
    pub fn gram(vectors: &[Vec<T>]) -> Self {
        let k = vectors.len();
        let mut g = Self::zeros(k);
        for i in 0..k {
            for j in i..k {
                let d = super::textproc::embedding::dot(&vectors[i], &vectors[j]);
                g.set(i, j, d);
                g.set(j, i, d);
            }
        }
        g
    }

    /// Second-moment matrix `sum_i v_i v_i^T`; shares its nonzero spectrum with the
    /// Gram matrix of the same vectors.
    pub fn scatter(vectors: &[Vec<T>], dimension: usize) -> Self {
        let mut s = Self::zeros(dimension);
        for v in vectors {
            for a in 0..dimension {
                for b in a..dimension {
                    let x = s.get(a, b) + v[a] * v[b];
                    s.set(a, b, x);
                    s.set(b, a, x);
                }
            }
        }
        s
    }

    /// Eigenvalues by cyclic Jacobi rotations, in no particular order.
    pub fn eigenvalues(&self) -> Vec<T> {
        let n = self.n;
        let mut a = self.clone();
        let eps = T::epsilon();
        let scale = a.data.iter().fold(T::zero(), |m, &x| m + x * x).sqrt();
        if scale == T::zero() {
            return vec![T::zero(); n];
        }
        for _sweep in 0..100 {
            let mut off = T::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off + a.get(i, j) * a.get(i, j);
                }
            }
            if off.sqrt() <= eps * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq == T::zero() {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let two = T::one() + T::one();
                    let theta = (aqq - app) / (two * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        (0..n).map(|i| a.get(i, i)).collect()
    }
}

/// Shannon entropy (nats) of a spectrum normalized to sum 1. Negative round-off
/// eigenvalues are treated as zero, and `0 ln 0 = 0`.
pub fn spectrum_entropy<T: Real>(eigenvalues: &[T]) -> T {
    let clipped: Vec<T> = eigenvalues
        .iter()
        .map(|&l| if l > T::zero() { l } else { T::zero() })
        .collect();
    let total = clipped.iter().fold(T::zero(), |s, &l| s + l);
    if total == T::zero() {
        return T::zero();
    }
    let h = clipped.iter().fold(T::zero(), |h, &l| {
        let p = l / total;
        if p > T::zero() {
            h - p * p.ln()
        } else {
            h
        }
    });
    if h < T::zero() {
        T::zero()
    } else {
        h
    }
}

/// Spectral entropy of the Gram matrix of `vectors`. Uses the smaller of the k x k
/// Gram matrix and the d x d scatter matrix.
pub fn embedding_entropy<T: Real>(vectors: &[Vec<T>]) -> T {
    if vectors.len() <= 1 {
        return T::zero();
    }
    let dimension = vectors[0].len();
    let m = if vectors.len() <= dimension {
        SymMatrix::gram(vectors)
    } else {
        SymMatrix::scatter(vectors, dimension)
    };
    spectrum_entropy(&m.eigenvalues())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize, d: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                let mut v = vec![0.0; d];
                v[i] = 1.0;
                v
            })
            .collect()
    }

    #[test]
    fn known_spectrum() {
        let mut m = SymMatrix::<f64>::zeros(2);
        m.set(0, 0, 2.0);
        m.set(1, 1, 2.0);
        m.set(0, 1, 1.0);
        m.set(1, 0, 1.0);
        let mut ev = m.eigenvalues();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn orthogonal_vectors_give_log_n() {
        for n in [1, 2, 3, 5, 8] {
            let h = embedding_entropy(&basis(n, 8));
            assert!((h - (n as f64).ln()).abs() < 1e-12, "n={n} h={h}");
        }
    }

    #[test]
    fn repeated_vector_is_zero_entropy() {
        let v = vec![vec![0.6, 0.8]; 5];
        assert!(embedding_entropy::<f64>(&v).abs() < 1e-12);
    }

    #[test]
    fn gram_and_scatter_routes_agree() {
        let vs: Vec<Vec<f64>> = (0..6)
            .map(|i| super::super::textproc::hashed_embedding(&format!("tok{i}"), 4))
            .collect();
        let g = spectrum_entropy(&SymMatrix::gram(&vs).eigenvalues());
        let s = spectrum_entropy(&SymMatrix::scatter(&vs, 4).eigenvalues());
        assert!((g - s).abs() < 1e-10);
    }

    #[test]
    fn generic_over_f32() {
        let vs: Vec<Vec<f32>> = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!((embedding_entropy(&vs) - 2f32.ln()).abs() < 1e-6);
    }
}
