//! Rule-based valence scoring in the style of lexicon sentiment analyzers.
//!
//! Each lexicon word contributes its valence. A booster word directly before it pushes
//! the valence further from zero, and a negator within the preceding window flips and
//! damps it. The summed valence `v` is squashed into (-1, 1) as `v / sqrt(v^2 + alpha)`.

use std::collections::{HashMap, HashSet};

use crate::scalar::Real;

use super::tokenize::tokenize;

pub const DEFAULT_NORMALIZATION_ALPHA: f64 = 15.0;
pub const DEFAULT_NEGATION_WINDOW: usize = 3;
pub const DEFAULT_NEGATION_SCALAR: f64 = 0.74;
pub const MAX_VALENCE: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SentimentLexicon {
    entries: HashMap<String, f64>,
    boosters: HashMap<String, f64>,
    negators: HashSet<String>,
    pub normalization_alpha: f64,
    pub negation_window: usize,
    pub negation_scalar: f64,
}

impl SentimentLexicon {
    /// Builds a lexicon with no boosters or negators. Keys are lowercased; every valence
    /// must lie in [-4, 4].
    pub fn new<K: AsRef<str>>(entries: impl IntoIterator<Item = (K, f64)>) -> Result<Self, String> {
        let mut map = HashMap::new();
        for (k, v) in entries {
            let k = normalize_word(k.as_ref());
            if !(-MAX_VALENCE..=MAX_VALENCE).contains(&v) {
                return Err(format!("valence {v} for `{k}` outside [-4, 4]"));
            }
            map.insert(k, v);
        }
        Ok(Self {
            entries: map,
            boosters: HashMap::new(),
            negators: HashSet::new(),
            normalization_alpha: DEFAULT_NORMALIZATION_ALPHA,
            negation_window: DEFAULT_NEGATION_WINDOW,
            negation_scalar: DEFAULT_NEGATION_SCALAR,
        })
    }

    pub fn with_boosters<K: AsRef<str>>(mut self, boosters: impl IntoIterator<Item = (K, f64)>) -> Self {
        self.boosters = boosters
            .into_iter()
            .map(|(k, v)| (normalize_word(k.as_ref()), v))
            .collect();
        self
    }

    pub fn with_negators<K: AsRef<str>>(mut self, negators: impl IntoIterator<Item = K>) -> Self {
        self.negators = negators
            .into_iter()
            .map(|k| normalize_word(k.as_ref()))
            .collect();
        self
    }

    pub fn valence(&self, word: &str) -> Option<f64> {
        self.entries.get(&normalize_word(word)).copied()
    }

    pub fn booster(&self, word: &str) -> Option<f64> {
        self.boosters.get(&normalize_word(word)).copied()
    }

    pub fn is_negator(&self, word: &str) -> bool {
        let w = normalize_word(word);
        self.negators.contains(&w) || w.ends_with("n't")
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Copy with every valence sign-flipped.
    pub fn mirrored(&self) -> Self {
        let mut out = self.clone();
        for v in out.entries.values_mut() {
            *v = -*v;
        }
        out
    }

    /// Summed, modifier-adjusted valence of the word tokens in `text`.
    pub fn raw_valence(&self, text: &str) -> f64 {
        let words: Vec<String> = tokenize(text)
            .into_iter()
            .filter(|t| t.is_word())
            .map(|t| normalize_word(t.text))
            .collect();
        let mut total = 0.0;
        for (i, word) in words.iter().enumerate() {
            let Some(mut v) = self.entries.get(word).copied() else {
                continue;
            };
            if v == 0.0 {
                continue;
            }
            if let Some(inc) = i.checked_sub(1).and_then(|p| self.boosters.get(&words[p])) {
                v += v.signum() * inc;
            }
            let window_start = i.saturating_sub(self.negation_window);
            if words[window_start..i].iter().any(|w| self.is_negator(w)) {
                v *= -self.negation_scalar;
            }
            total += v;
        }
        total
    }
}

fn normalize_word(word: &str) -> String {
    word.to_lowercase().replace('\u{2019}', "'")
}

/// `v / sqrt(v^2 + alpha)`; maps any finite valence into (-1, 1).
pub fn normalize_valence<T: Real>(valence: T, alpha: T) -> T {
    if valence == T::zero() {
        return T::zero();
    }
    valence / (valence * valence + alpha).sqrt()
}

/// Sentiment of one sentence in [-1, 1]; 0 when no lexicon word occurs.
pub fn sentence_sentiment(sentence: &str, lex: &SentimentLexicon) -> f64 {
    normalize_valence(lex.raw_valence(sentence), lex.normalization_alpha)
}
