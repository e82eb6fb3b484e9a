//! Token embeddings behind a small trait, plus a deterministic hashed fallback.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;

pub const DEFAULT_DIMENSION: usize = 64;

/// Maps tokens to unit vectors of a fixed dimension. Implementations must be
/// deterministic.
pub trait EmbeddingProvider: Send + Sync {
    fn dimension(&self) -> usize;

    fn embed(&self, token: &str) -> Vec<f64>;

    fn embed_tokens(&self, tokens: &[String]) -> Vec<Vec<f64>> {
        tokens.iter().map(|t| self.embed(t)).collect()
    }
}

/// 64-bit FNV-1a; stable across platforms and releases, unlike `std`'s hasher.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Unit vector for `token`: a ChaCha8 stream seeded with the FNV-1a hash of the
/// lowercased token draws `dimension` values uniformly from [-1, 1), which are then
/// normalized.
pub fn hashed_embedding(token: &str, dimension: usize) -> Vec<f64> {
    assert!(dimension >= 2, "embedding dimension must be at least 2");
    let seed = fnv1a64(token.to_lowercase().as_bytes());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dimension).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = l2_norm(&v);
    if norm == 0.0 {
        v.iter_mut().for_each(|x| *x = 0.0);
        v[0] = 1.0;
    } else {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashedEmbedding {
    dimension: usize,
}

impl HashedEmbedding {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension >= 2, "embedding dimension must be at least 2");
        Self { dimension }
    }
}

impl Default for HashedEmbedding {
    fn default() -> Self {
        Self::new(DEFAULT_DIMENSION)
    }
}

impl EmbeddingProvider for HashedEmbedding {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, token: &str) -> Vec<f64> {
        hashed_embedding(token, self.dimension)
    }
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn l2_norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine<T: Real>(a: &[T], b: &[T]) -> T {
    let denom = l2_norm(a) * l2_norm(b);
    if denom == T::zero() {
        T::zero()
    } else {
        dot(a, b) / denom
    }
}

/// Component-wise mean; the zero vector of `dimension` for no input.
pub fn mean_vector<T: Real>(vectors: &[Vec<T>], dimension: usize) -> Vec<T> {
    let mut mean = vec![T::zero(); dimension];
    if vectors.is_empty() {
        return mean;
    }
    for v in vectors {
        for (m, &x) in mean.iter_mut().zip(v) {
            *m = *m + x;
        }
    }
    let n = T::from_count(vectors.len());
    mean.iter_mut().for_each(|m| *m = *m / n);
    mean
}
