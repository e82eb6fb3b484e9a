//! Per-response small-talk measurements: brevity, tone, specificity, coherence and the
//! assistance signal.

use serde::{Deserialize, Serialize};

use crate::config::ObserverConfig;
use crate::spectral::embedding_entropy;
use crate::textproc::embedding::{cosine, mean_vector};
use crate::textproc::{
    content_tokens, sentence_sentiment, split_sentences, tag_descriptors_entities, tokenize,
    EmbeddingProvider, SentimentLexicon, TextResources,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub token_count: u32,
    pub combined_sentiment: f64,
    pub holistic_sentiment: f64,
    pub sentence_sentiments: Vec<f64>,
    pub specificity: f64,
    pub entity_count: u32,
    pub descriptor_count: u32,
    pub response_entropy: f64,
    pub previous_entropy: Option<f64>,
    pub info_gain: Option<f64>,
    pub centroid_similarity: Option<f64>,
    pub assistance_hits: u32,
    pub assistance_cosine: f64,
}

/// Provider-reported completion tokens win; otherwise the local token count.
pub fn brevity(text: &str, provider_tokens: Option<u32>) -> u32 {
    provider_tokens.unwrap_or_else(|| tokenize(text).len() as u32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentimentScores {
    pub combined: f64,
    pub holistic: f64,
    pub sentences: Vec<f64>,
}

/// Holistic score blended with the mean sentence score:
/// `C = w_H * H + (1 - w_H) * mean(s_i)`.
///
/// The per-sentence weights are uniform and together carry the mass `1 - w_H`, which
/// keeps `C` a convex combination inside [-1, 1].
pub fn combined_sentiment(text: &str, lex: &SentimentLexicon, holistic_weight: f64) -> SentimentScores {
    let sentences: Vec<f64> = split_sentences(text)
        .into_iter()
        .map(|s| sentence_sentiment(s, lex))
        .collect();
    if sentences.is_empty() {
        return SentimentScores {
            combined: 0.0,
            holistic: 0.0,
            sentences,
        };
    }
    let holistic = sentence_sentiment(text, lex);
    let mean = sentences.iter().sum::<f64>() / sentences.len() as f64;
    let combined = (holistic_weight * holistic + (1.0 - holistic_weight) * mean).clamp(-1.0, 1.0);
    SentimentScores {
        combined,
        holistic,
        sentences,
    }
}

/// `w_e * min(1, E / E_max) + (1 - w_e) * min(1, D / D_max)`.
pub fn specificity_from_counts(entities: usize, descriptors: usize, cfg: &ObserverConfig) -> f64 {
    let e = (entities as f64 / f64::from(cfg.entity_cap.max(1))).min(1.0);
    let d = (descriptors as f64 / f64::from(cfg.descriptor_cap.max(1))).min(1.0);
    let w = cfg.specificity_entity_weight;
    (w * e + (1.0 - w) * d).clamp(0.0, 1.0)
}

pub fn specificity(text: &str, cfg: &ObserverConfig, res: &TextResources) -> f64 {
    let c = tag_descriptors_entities(text, res);
    specificity_from_counts(c.entities, c.descriptors, cfg)
}

/// Token-weighted mean over sentences of the spectral entropy of each sentence's
/// token embeddings.
pub fn response_entropy(text: &str, emb: &dyn EmbeddingProvider) -> f64 {
    let per_sentence: Vec<(usize, f64)> = split_sentences(text)
        .into_iter()
        .map(|s| {
            let tokens = content_tokens(s);
            let h = embedding_entropy(&emb.embed_tokens(&tokens));
            (tokens.len(), h)
        })
        .collect();
    let total: usize = per_sentence.iter().map(|(n, _)| n).sum();
    if total == 0 {
        return 0.0;
    }
    per_sentence
        .iter()
        .map(|&(n, h)| n as f64 / total as f64 * h)
        .sum()
}

/// Mean embedding of the content tokens of `text`.
pub fn centroid(text: &str, emb: &dyn EmbeddingProvider) -> Vec<f64> {
    mean_vector(&emb.embed_tokens(&content_tokens(text)), emb.dimension())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coherence {
    pub entropy: f64,
    pub previous_entropy: Option<f64>,
    pub info_gain: Option<f64>,
    pub centroid_similarity: Option<f64>,
}

/// Entropy of `current`, and when a previous exchange exists, the entropy change
/// relative to it and the cosine between the two centroids.
pub fn coherence(current: &str, previous: Option<&str>, emb: &dyn EmbeddingProvider) -> Coherence {
    let entropy = response_entropy(current, emb);
    match previous {
        None => Coherence {
            entropy,
            previous_entropy: None,
            info_gain: None,
            centroid_similarity: None,
        },
        Some(prev) => {
            let prev_entropy = response_entropy(prev, emb);
            let sim = cosine(&centroid(current, emb), &centroid(prev, emb)).clamp(-1.0, 1.0);
            Coherence {
                entropy,
                previous_entropy: Some(prev_entropy),
                info_gain: Some(entropy - prev_entropy),
                centroid_similarity: Some(sim),
            }
        }
    }
}

const STEM_SUFFIXES: [&str; 4] = ["ance", "ing", "ed", "s"];

/// Strips one of -ance, -ing, -ed, -s when at least three characters remain.
pub fn stem(word: &str) -> String {
    let w = word.to_lowercase();
    for suffix in STEM_SUFFIXES {
        if let Some(base) = w.strip_suffix(suffix) {
            if base.chars().count() >= 3 {
                return base.to_string();
            }
        }
    }
    w
}

pub fn assistance_signal(text: &str, cfg: &ObserverConfig, emb: &dyn EmbeddingProvider) -> (u32, f64) {
    let keyword_stems: Vec<String> = cfg.assistance_keywords.iter().map(|k| stem(k.trim())).collect();
    let hits = tokenize(text)
        .iter()
        .filter(|t| t.is_word() && keyword_stems.contains(&stem(t.text)))
        .count() as u32;
    let keyword_tokens: Vec<String> = cfg
        .assistance_keywords
        .iter()
        .flat_map(|k| content_tokens(k))
        .collect();
    let keyword_centroid = mean_vector(&emb.embed_tokens(&keyword_tokens), emb.dimension());
    let sim = cosine(&centroid(text, emb), &keyword_centroid).clamp(-1.0, 1.0);
    (hits, sim)
}

/// The pieces every metric needs, borrowed for the duration of an analysis.
#[derive(Clone, Copy)]
pub struct Analyzer<'a> {
    pub config: &'a ObserverConfig,
    pub resources: &'a TextResources,
    pub embedding: &'a dyn EmbeddingProvider,
}

impl<'a> Analyzer<'a> {
    pub fn new(
        config: &'a ObserverConfig,
        resources: &'a TextResources,
        embedding: &'a dyn EmbeddingProvider,
    ) -> Self {
        Self {
            config,
            resources,
            embedding,
        }
    }

    /// Scores `candidate`. `context` is the previous exchange the candidate should
    /// stay coherent with, or `None` on the first exchange.
    pub fn analyze(&self, candidate: &str, provider_tokens: Option<u32>, context: Option<&str>) -> MetricReport {
        let sentiment = combined_sentiment(
            candidate,
            &self.resources.lexicon,
            self.config.sentiment_holistic_weight,
        );
        let tags = tag_descriptors_entities(candidate, self.resources);
        let coh = coherence(candidate, context, self.embedding);
        let (assistance_hits, assistance_cosine) =
            assistance_signal(candidate, self.config, self.embedding);
        MetricReport {
            token_count: brevity(candidate, provider_tokens),
            combined_sentiment: sentiment.combined,
            holistic_sentiment: sentiment.holistic,
            sentence_sentiments: sentiment.sentences,
            specificity: specificity_from_counts(tags.entities, tags.descriptors, self.config),
            entity_count: tags.entities as u32,
            descriptor_count: tags.descriptors as u32,
            response_entropy: coh.entropy,
            previous_entropy: coh.previous_entropy,
            info_gain: coh.info_gain,
            centroid_similarity: coh.centroid_similarity,
            assistance_hits,
            assistance_cosine,
        }
    }
}
