//! Scoring and supervision for small-talk agents.
//!
//! An [`observer::Supervisor`] scores each candidate reply on brevity, tone,
//! specificity, coherence and assistance, then either lets it through, queues
//! guidance for the next turn, or forces a regeneration. [`session::Session`]
//! wraps that loop with conversation state and JSONL transcripts.

pub mod config;
pub mod metrics;
pub mod observer;
pub mod provider;
pub mod scalar;
pub mod session;
pub mod spectral;
pub mod textproc;
pub mod transcript;
pub mod types;

pub use config::{load_config, ConfigError, FieldError, ObserverConfig};
pub use metrics::{Analyzer, MetricReport};
pub use observer::{
    Criterion, CriterionViolation, FeedbackEvent, FeedbackKind, FinalChoice, ScoredCandidate,
    Severity, Supervisor, Verdict,
};
pub use provider::{ChatMessage, ChatProvider, GenerationSettings, HttpProvider, ProviderError, ScriptedProvider};
pub use session::{Session, SessionError, SessionEvent, DEFAULT_SYSTEM_PROMPT};
pub use textproc::{EmbeddingProvider, HashedEmbedding, TextResources};
pub use types::{Candidate, Conversation, Role, Turn};

/// Working precision of the scoring pipeline.
pub type Real64 = f64;
/// Reduced precision accepted by the numeric kernels.
pub type Real32 = f32;
/// Spectral entropy at working precision.
pub type SymMatrix64 = spectral::SymMatrix<f64>;
