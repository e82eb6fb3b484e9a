//! Deterministic text primitives shared by the metric analyzers.

pub mod embedding;
pub mod resources;
pub mod sentences;
pub mod sentiment;
pub mod tagging;
pub mod tokenize;

pub use embedding::{hashed_embedding, EmbeddingProvider, HashedEmbedding};
pub use resources::TextResources;
pub use sentences::split_sentences;
pub use sentiment::{sentence_sentiment, SentimentLexicon};
pub use tagging::{tag_descriptors_entities, TagCounts};
pub use tokenize::{content_tokens, tokenize, TokenKind, TokenSpan};
