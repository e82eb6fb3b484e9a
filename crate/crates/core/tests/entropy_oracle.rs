use nalgebra::{DMatrix, SymmetricEigen};
use parley_core::metrics::{coherence, response_entropy};
use parley_core::spectral::embedding_entropy;
use parley_core::textproc::{content_tokens, EmbeddingProvider, HashedEmbedding};
use proptest::prelude::*;

const GREEK: [&str; 8] = [
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
];

/// Standard basis vector per Greek letter name, so distinct names are orthogonal.
struct Basis;

impl EmbeddingProvider for Basis {
    fn dimension(&self) -> usize {
        GREEK.len()
    }

    fn embed(&self, token: &str) -> Vec<f64> {
        let k = GREEK
            .iter()
            .position(|g| *g == token.to_lowercase())
            .unwrap_or(0);
        let mut v = vec![0.0; GREEK.len()];
        v[k] = 1.0;
        v
    }
}

fn oracle_entropy(vectors: &[Vec<f64>]) -> f64 {
    let n = vectors.len();
    if n <= 1 {
        return 0.0;
    }
    let g = DMatrix::from_fn(n, n, |i, j| {
        vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum::<f64>()
    });
    let eig = SymmetricEigen::new(g).eigenvalues;
    let pos: Vec<f64> = eig.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = pos.iter().sum();
    pos.iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| {
            let p = l / total;
            -p * p.ln()
        })
        .sum()
}

#[test]
fn orthogonal_tokens_give_ln_n() {
    for n in [1usize, 2, 4, 8] {
        let text = GREEK[..n].join(" ");
        let ours = response_entropy(&text, &Basis);
        let oracle = oracle_entropy(&Basis.embed_tokens(&content_tokens(&text)));
        let expected = (n as f64).ln();
        assert!((ours - expected).abs() < 1e-9, "n={n}: {ours} vs ln n {expected}");
        assert!((oracle - expected).abs() < 1e-9, "oracle n={n}: {oracle}");
    }
}

#[test]
fn info_gain_between_ln4_and_ln2() {
    let c = coherence("alpha beta gamma delta", Some("alpha beta"), &Basis);
    assert!((c.info_gain.unwrap() - 2f64.ln()).abs() < 1e-9);
}

#[test]
fn identical_text_has_zero_gain_and_unit_similarity() {
    let emb = HashedEmbedding::default();
    let t = "We walked along the river and watched the boats.";
    let c = coherence(t, Some(t), &emb);
    assert_eq!(c.info_gain, Some(0.0));
    assert!((c.centroid_similarity.unwrap() - 1.0).abs() < 1e-12);
    assert!(coherence(t, None, &emb).info_gain.is_none());
}

#[test]
fn degenerate_cases_are_zero() {
    let emb = HashedEmbedding::default();
    assert_eq!(response_entropy("", &emb), 0.0);
    assert_eq!(response_entropy("hello", &emb), 0.0);
    assert!(response_entropy("hello hello hello", &emb).abs() < 1e-12);
}

#[test]
fn more_tokens_than_dimensions_matches_oracle() {
    let emb = HashedEmbedding::new(4);
    let words: Vec<String> = "one two three four five six seven eight nine ten"
        .split(' ')
        .map(String::from)
        .collect();
    let vs = emb.embed_tokens(&words);
    assert!((embedding_entropy::<f64>(&vs) - oracle_entropy(&vs)).abs() < 1e-9);
}

fn word() -> impl Strategy<Value = String> {
    "[a-z]{1,7}"
}

proptest! {
    #[test]
    fn hashed_entropy_matches_oracle(words in prop::collection::vec(word(), 0..24)) {
        let emb = HashedEmbedding::default();
        let vs = emb.embed_tokens(&words);
        prop_assert!((embedding_entropy::<f64>(&vs) - oracle_entropy(&vs)).abs() < 1e-9);
    }

    #[test]
    fn entropy_is_permutation_invariant_and_bounded(
        words in prop::collection::vec(word(), 1..20),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let emb = HashedEmbedding::default();
        let mut shuffled = words.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let a = response_entropy(&words.join(" "), &emb);
        let b = response_entropy(&shuffled.join(" "), &emb);
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!(a >= 0.0);
        prop_assert!(a <= (words.len() as f64).ln() + 1e-9);
    }

    #[test]
    fn multi_sentence_entropy_bounded_by_longest(
        sentences in prop::collection::vec(prop::collection::vec(word(), 1..10), 1..5),
    ) {
        let emb = HashedEmbedding::default();
        let text: String = sentences
            .iter()
            .map(|s| {
                let mut s = s.join(" ");
                s[..1].make_ascii_uppercase();
                s + ". "
            })
            .collect();
        let longest = parley_core::textproc::split_sentences(&text)
            .iter()
            .map(|s| content_tokens(s).len())
            .max()
            .unwrap();
        let h = response_entropy(&text, &emb);
        prop_assert!(h >= 0.0 && h <= (longest as f64).ln() + 1e-9);
    }
}
