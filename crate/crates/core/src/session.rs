//! Conversation lifecycle: context assembly, supervised turns, persistence and replay.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use async_trait::async_trait;
use chrono::{DateTime, TimeZone, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::config::ObserverConfig;
use crate::metrics::{Analyzer, MetricReport};
use crate::observer::{FeedbackEvent, FeedbackKind, ScoredCandidate, SuperviseError, Supervisor, Verdict};
use crate::provider::{
    ChatMessage, ChatProvider, CompletionRequest, CompletionResponse, GenerationSettings,
    ProviderError,
};
use crate::textproc::{tokenize, EmbeddingProvider, HashedEmbedding, TextResources};
use crate::transcript::{self, TranscriptError, TranscriptWriter};
use crate::types::{Conversation, Role, Turn};

pub const DEFAULT_SYSTEM_PROMPT: &str =
    "You are a friendly companion who engages in casual, small talk conversation.";

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Returns `start`, `start + step`, `start + 2 step`, ... on successive calls.
#[derive(Debug)]
pub struct SteppingClock {
    start: DateTime<Utc>,
    step: Duration,
    ticks: AtomicU64,
}

impl SteppingClock {
    pub fn new(start: DateTime<Utc>, step: Duration) -> Self {
        Self {
            start,
            step,
            ticks: AtomicU64::new(0),
        }
    }

    /// One-second steps from 2024-01-01T00:00:00Z.
    pub fn fixed() -> Self {
        Self::new(
            Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
            Duration::from_secs(1),
        )
    }
}

impl Clock for SteppingClock {
    fn now(&self) -> DateTime<Utc> {
        let n = self.ticks.fetch_add(1, Ordering::SeqCst);
        let offset = chrono::Duration::from_std(self.step * n as u32).unwrap_or_default();
        self.start + offset
    }
}

/// Plays back recorded instants, then keeps returning the last one.
#[derive(Debug)]
pub struct ScheduledClock {
    times: Vec<DateTime<Utc>>,
    next: AtomicUsize,
}

impl ScheduledClock {
    pub fn new(times: Vec<DateTime<Utc>>) -> Self {
        Self {
            times,
            next: AtomicUsize::new(0),
        }
    }
}

impl Clock for ScheduledClock {
    fn now(&self) -> DateTime<Utc> {
        let i = self.next.fetch_add(1, Ordering::SeqCst);
        self.times
            .get(i)
            .or(self.times.last())
            .copied()
            .unwrap_or_else(Utc::now)
    }
}

/// Progress notifications for one user turn, in emission order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    UserTurn {
        turn_index: u32,
        text: String,
    },
    CandidateScored {
        turn_index: u32,
        attempt: u32,
        text: String,
        metrics: MetricReport,
        verdict: Verdict,
    },
    FeedbackIssued {
        turn_index: u32,
        feedback: FeedbackEvent,
    },
    AgentTurn {
        turn_index: u32,
        text: String,
        metrics: MetricReport,
        regeneration_attempts: u32,
    },
}

impl SessionEvent {
    pub fn name(&self) -> &'static str {
        match self {
            SessionEvent::UserTurn { .. } => "user_turn",
            SessionEvent::CandidateScored { .. } => "candidate_scored",
            SessionEvent::FeedbackIssued { .. } => "feedback_issued",
            SessionEvent::AgentTurn { .. } => "agent_turn",
        }
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("message is empty")]
    EmptyMessage,
    #[error(transparent)]
    Provider(#[from] SuperviseError),
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
}

/// Result of a completed user turn.
#[derive(Debug, Clone, PartialEq)]
pub struct TurnOutcome {
    pub agent: Turn,
    pub feedback: Option<FeedbackEvent>,
}

pub struct SessionBuilder {
    config: ObserverConfig,
    system_prompt: String,
    seed: u64,
    id: Option<String>,
    resources: Arc<TextResources>,
    embedding: Arc<dyn EmbeddingProvider>,
    settings: GenerationSettings,
    clock: Arc<dyn Clock>,
    transcript_path: Option<PathBuf>,
}

impl SessionBuilder {
    pub fn system_prompt(mut self, prompt: impl Into<String>) -> Self {
        self.system_prompt = prompt.into();
        self
    }

    pub fn id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn resources(mut self, resources: Arc<TextResources>) -> Self {
        self.resources = resources;
        self
    }

    pub fn embedding(mut self, embedding: Arc<dyn EmbeddingProvider>) -> Self {
        self.embedding = embedding;
        self
    }

    pub fn settings(mut self, settings: GenerationSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    /// Write the transcript to `path` as the session progresses.
    pub fn transcript(mut self, path: impl Into<PathBuf>) -> Self {
        self.transcript_path = Some(path.into());
        self
    }

    pub fn build(self) -> Result<Session, SessionError> {
        let id = self.id.unwrap_or_else(|| uuid::Uuid::new_v4().to_string());
        let conversation = new_conversation(
            self.config,
            &self.system_prompt,
            self.seed,
            id,
            self.clock.now(),
        );
        let writer = self
            .transcript_path
            .map(|p| TranscriptWriter::create(p, &conversation))
            .transpose()?;
        Ok(Session {
            rng: ChaCha8Rng::seed_from_u64(self.seed),
            conversation,
            resources: self.resources,
            embedding: self.embedding,
            settings: self.settings,
            clock: self.clock,
            writer,
        })
    }
}

/// A conversation holding only its system prompt turn.
pub fn new_conversation(
    mut config: ObserverConfig,
    system_prompt: &str,
    seed: u64,
    id: String,
    ts: DateTime<Utc>,
) -> Conversation {
    config.rng_seed = seed;
    Conversation {
        id,
        system_prompt: system_prompt.to_string(),
        turns: vec![Turn::plain(
            0,
            Role::SystemPrompt,
            system_prompt,
            tokenize(system_prompt).len() as u32,
            ts,
        )],
        config_snapshot: config,
        rng_seed: seed,
    }
}

/// Stable conversation id derived from a seed, for reproducible transcripts.
pub fn seeded_id(seed: u64) -> String {
    use rand::RngCore;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_1D00_0000_0000);
    let mut bytes = [0u8; 16];
    rng.fill_bytes(&mut bytes);
    uuid::Builder::from_random_bytes(bytes).into_uuid().to_string()
}

pub struct Session {
    conversation: Conversation,
    rng: ChaCha8Rng,
    resources: Arc<TextResources>,
    embedding: Arc<dyn EmbeddingProvider>,
    settings: GenerationSettings,
    clock: Arc<dyn Clock>,
    writer: Option<TranscriptWriter>,
}

impl Session {
    pub fn builder(config: ObserverConfig, seed: u64) -> SessionBuilder {
        SessionBuilder {
            config,
            system_prompt: DEFAULT_SYSTEM_PROMPT.to_string(),
            seed,
            id: None,
            resources: Arc::new(TextResources::builtin()),
            embedding: Arc::new(HashedEmbedding::default()),
            settings: GenerationSettings::default(),
            clock: Arc::new(SystemClock),
            transcript_path: None,
        }
    }

    pub fn conversation(&self) -> &Conversation {
        &self.conversation
    }

    pub fn config(&self) -> &ObserverConfig {
        &self.conversation.config_snapshot
    }

    pub fn transcript_path(&self) -> Option<&Path> {
        self.writer.as_ref().map(TranscriptWriter::path)
    }

    pub fn transcript_bytes(&self) -> Vec<u8> {
        transcript::serialize_conversation(&self.conversation)
    }

    fn push_turn(&mut self, turn: Turn) -> Result<(), SessionError> {
        if let Some(w) = self.writer.as_mut() {
            w.append(&turn)?;
        }
        self.conversation.turns.push(turn);
        Ok(())
    }

    /// Base prompt, then the latest agent turn's carried-forward feedback, then the
    /// user/agent history.
    pub fn provider_context(&self) -> Vec<ChatMessage> {
        let c = &self.conversation;
        let mut messages = vec![ChatMessage::new(Role::SystemPrompt, c.system_prompt.clone())];
        if let Some(fb) = c
            .agent_turns()
            .last()
            .and_then(|t| t.feedback.as_ref())
            .filter(|f| f.carries_forward())
        {
            messages.push(ChatMessage::new(Role::ObserverFeedback, fb.prompt_text.clone()));
        }
        messages.extend(
            c.turns
                .iter()
                .filter(|t| matches!(t.role, Role::User | Role::Agent))
                .map(|t| ChatMessage::new(t.role, t.text.clone())),
        );
        messages
    }

    /// Appends the user turn, runs the observer, then appends the agent turn and any
    /// feedback turn. On provider failure the user turn stays in the transcript with
    /// no reply.
    pub async fn user_turn(
        &mut self,
        text: &str,
        provider: &dyn ChatProvider,
        on_event: &mut (dyn FnMut(SessionEvent) + Send),
    ) -> Result<TurnOutcome, SessionError> {
        if text.trim().is_empty() {
            return Err(SessionError::EmptyMessage);
        }
        let user_pos = self.conversation.turns.len();
        let user_index = self.conversation.next_index();
        let ts = self.clock.now();
        self.push_turn(Turn::plain(
            user_index,
            Role::User,
            text,
            tokenize(text).len() as u32,
            ts,
        ))?;
        on_event(SessionEvent::UserTurn {
            turn_index: user_index,
            text: text.to_string(),
        });

        let context = self.provider_context();
        let exchange = self.conversation.previous_exchange(user_pos);
        let agent_index = user_index + 1;
        let supervision = {
            let supervisor = Supervisor {
                analyzer: Analyzer::new(
                    &self.conversation.config_snapshot,
                    &self.resources,
                    self.embedding.as_ref(),
                ),
                settings: &self.settings,
            };
            let mut forward = |c: ScoredCandidate| {
                on_event(SessionEvent::CandidateScored {
                    turn_index: agent_index,
                    attempt: c.attempt,
                    text: c.text,
                    metrics: c.metrics,
                    verdict: c.verdict,
                })
            };
            supervisor
                .supervise(&context, exchange.as_deref(), provider, &mut self.rng, &mut forward)
                .await?
        };

        let agent = Turn {
            turn_index: agent_index,
            role: Role::Agent,
            text: supervision.text,
            completion_tokens: supervision.completion_tokens,
            metrics: Some(supervision.metrics),
            feedback: supervision.feedback.clone(),
            regeneration_attempts: supervision.regeneration_attempts,
            discarded_candidates: supervision.discarded,
            timestamp: self.clock.now(),
        };
        self.push_turn(agent.clone())?;
        if let Some(fb) = &supervision.feedback {
            let ts = self.clock.now();
            self.push_turn(Turn::plain(
                agent_index + 1,
                Role::ObserverFeedback,
                fb.prompt_text.clone(),
                0,
                ts,
            ))?;
            on_event(SessionEvent::FeedbackIssued {
                turn_index: agent_index,
                feedback: fb.clone(),
            });
        }
        on_event(SessionEvent::AgentTurn {
            turn_index: agent_index,
            text: agent.text.clone(),
            metrics: agent.metrics.clone().expect("agent turns carry metrics"),
            regeneration_attempts: agent.regeneration_attempts,
        });
        Ok(TurnOutcome {
            feedback: supervision.feedback,
            agent,
        })
    }
}

/// Serves recorded (text, tokens) pairs in order.
struct RecordedProvider {
    replies: Vec<(String, u32)>,
    next: Mutex<usize>,
}

#[async_trait]
impl ChatProvider for RecordedProvider {
    async fn complete(&self, _req: &CompletionRequest) -> Result<CompletionResponse, ProviderError> {
        let mut next = self.next.lock().expect("cursor poisoned");
        let (text, tokens) = self
            .replies
            .get(*next)
            .cloned()
            .ok_or_else(|| ProviderError::Config("recorded replies exhausted".into()))?;
        *next += 1;
        Ok(CompletionResponse {
            text,
            completion_tokens: Some(tokens),
            latency: Duration::ZERO,
        })
    }
}

/// Every candidate of an agent turn in generation order.
pub fn generation_order(turn: &Turn) -> Vec<(String, u32)> {
    let mut out: Vec<(String, u32)> = turn
        .discarded_candidates
        .iter()
        .map(|c| (c.text.clone(), c.metrics.token_count))
        .collect();
    let at = turn
        .feedback
        .as_ref()
        .map_or(out.len(), |f| f.chosen_attempt as usize)
        .min(out.len());
    out.insert(at, (turn.text.clone(), turn.completion_tokens));
    out
}

/// Re-runs a recorded conversation: same id, prompt, config, seed and timestamps, with
/// the recorded candidates standing in for the provider. A deterministic pipeline
/// reproduces the original transcript byte for byte.
pub async fn rerun(
    original: &Conversation,
    resources: Arc<TextResources>,
    embedding: Arc<dyn EmbeddingProvider>,
) -> Result<Conversation, SessionError> {
    let replies = original.agent_turns().flat_map(generation_order).collect();
    let provider = RecordedProvider {
        replies,
        next: Mutex::new(0),
    };
    let clock = ScheduledClock::new(original.turns.iter().map(|t| t.timestamp).collect());
    let mut session = Session::builder(original.config_snapshot.clone(), original.rng_seed)
        .system_prompt(original.system_prompt.clone())
        .id(original.id.clone())
        .resources(resources)
        .embedding(embedding)
        .clock(Arc::new(clock))
        .build()?;
    for t in original.turns.iter().filter(|t| t.role == Role::User) {
        session.user_turn(&t.text, &provider, &mut |_| {}).await?;
    }
    Ok(session.conversation)
}

/// Feedback bookkeeping over the agent turns of one or more conversations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FlagRates {
    pub agent_turns: u32,
    pub implicit: u32,
    pub forced: u32,
}

impl FlagRates {
    pub fn of(conversation: &Conversation) -> Self {
        let mut out = Self::default();
        out.add(conversation);
        out
    }

    pub fn add(&mut self, conversation: &Conversation) {
        for t in conversation.agent_turns() {
            self.agent_turns += 1;
            match t.feedback.as_ref().map(|f| f.kind) {
                Some(FeedbackKind::Implicit) => self.implicit += 1,
                Some(FeedbackKind::Forced) => self.forced += 1,
                None => {}
            }
        }
    }

    pub fn implicit_rate(&self) -> f64 {
        rate(self.implicit, self.agent_turns)
    }

    pub fn forced_rate(&self) -> f64 {
        rate(self.forced, self.agent_turns)
    }
}

fn rate(k: u32, n: u32) -> f64 {
    if n == 0 {
        0.0
    } else {
        f64::from(k) / f64::from(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub turn_index: u32,
    /// Index into the turn's discarded candidates, or `None` for the kept response.
    pub candidate: Option<usize>,
    pub field: &'static str,
    pub stored: String,
    pub recomputed: String,
}

#[derive(Debug, Clone)]
pub struct ReplayReport {
    pub conversation: Conversation,
    pub recomputed: Vec<(u32, MetricReport)>,
    pub mismatches: Vec<Mismatch>,
}

pub const REPLAY_TOLERANCE: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REPLAY_TOLERANCE
}

/// Field-by-field differences beyond [`REPLAY_TOLERANCE`].
pub fn compare_reports(stored: &MetricReport, recomputed: &MetricReport) -> Vec<(&'static str, String, String)> {
    let mut out = Vec::new();
    let mut ints = |name, a: u32, b: u32| {
        if a != b {
            out.push((name, a.to_string(), b.to_string()));
        }
    };
    ints("token_count", stored.token_count, recomputed.token_count);
    ints("entity_count", stored.entity_count, recomputed.entity_count);
    ints("descriptor_count", stored.descriptor_count, recomputed.descriptor_count);
    ints("assistance_hits", stored.assistance_hits, recomputed.assistance_hits);
    let reals = [
        ("combined_sentiment", stored.combined_sentiment, recomputed.combined_sentiment),
        ("holistic_sentiment", stored.holistic_sentiment, recomputed.holistic_sentiment),
        ("specificity", stored.specificity, recomputed.specificity),
        ("response_entropy", stored.response_entropy, recomputed.response_entropy),
        ("assistance_cosine", stored.assistance_cosine, recomputed.assistance_cosine),
    ];
    for (name, a, b) in reals {
        if !close(a, b) {
            out.push((name, a.to_string(), b.to_string()));
        }
    }
    let opts = [
        ("previous_entropy", stored.previous_entropy, recomputed.previous_entropy),
        ("info_gain", stored.info_gain, recomputed.info_gain),
        ("centroid_similarity", stored.centroid_similarity, recomputed.centroid_similarity),
    ];
    for (name, a, b) in opts {
        let same = match (a, b) {
            (None, None) => true,
            (Some(x), Some(y)) => close(x, y),
            _ => false,
        };
        if !same {
            out.push((name, format!("{a:?}"), format!("{b:?}")));
        }
    }
    let sentences_match = stored.sentence_sentiments.len() == recomputed.sentence_sentiments.len()
        && stored
            .sentence_sentiments
            .iter()
            .zip(&recomputed.sentence_sentiments)
            .all(|(a, b)| close(*a, *b));
    if !sentences_match {
        out.push((
            "sentence_sentiments",
            format!("{:?}", stored.sentence_sentiments),
            format!("{:?}", recomputed.sentence_sentiments),
        ));
    }
    out
}

/// Recomputes the metrics of every agent turn (and its discarded candidates) from
/// the stored text. `config` overrides the embedded snapshot when given.
pub fn replay_conversation(
    conversation: Conversation,
    config: Option<&ObserverConfig>,
    resources: &TextResources,
    embedding: &dyn EmbeddingProvider,
) -> ReplayReport {
    let cfg = config.unwrap_or(&conversation.config_snapshot).clone();
    let analyzer = Analyzer::new(&cfg, resources, embedding);
    let mut recomputed = Vec::new();
    let mut mismatches = Vec::new();
    for (pos, turn) in conversation.turns.iter().enumerate() {
        if turn.role != Role::Agent {
            continue;
        }
        let exchange = conversation.previous_exchange(pos);
        let mut check = |candidate: Option<usize>, text: &str, stored: &MetricReport| {
            let fresh = analyzer.analyze(text, Some(stored.token_count), exchange.as_deref());
            for (field, a, b) in compare_reports(stored, &fresh) {
                mismatches.push(Mismatch {
                    turn_index: turn.turn_index,
                    candidate,
                    field,
                    stored: a,
                    recomputed: b,
                });
            }
            fresh
        };
        if let Some(stored) = &turn.metrics {
            let fresh = check(None, &turn.text, stored);
            recomputed.push((turn.turn_index, fresh));
        }
        for (k, cand) in turn.discarded_candidates.iter().enumerate() {
            check(Some(k), &cand.text, &cand.metrics);
        }
    }
    ReplayReport {
        conversation,
        recomputed,
        mismatches,
    }
}

/// Reads a transcript and replays it with the shipped resources and hashed
/// embeddings.
pub fn replay(path: impl AsRef<Path>, config: Option<&ObserverConfig>) -> Result<ReplayReport, TranscriptError> {
    let conversation = transcript::read_transcript(path)?;
    Ok(replay_conversation(
        conversation,
        config,
        &TextResources::builtin(),
        &HashedEmbedding::default(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::ScriptedProvider;

    fn session(seed: u64) -> Session {
        Session::builder(ObserverConfig::default(), seed)
            .id("test")
            .clock(Arc::new(SteppingClock::fixed()))
            .build()
            .unwrap()
    }

    #[test]
    fn default_prompt_is_turn_zero() {
        let s = session(1);
        let t = &s.conversation().turns[0];
        assert_eq!(t.role, Role::SystemPrompt);
        assert_eq!(t.text, "You are a friendly companion who engages in casual, small talk conversation.");
        assert_eq!(s.conversation().rng_seed, 1);
        assert_eq!(s.config().rng_seed, 1);
    }

    #[test]
    fn custom_prompt() {
        let s = Session::builder(ObserverConfig::default(), 1)
            .system_prompt("Be terse.")
            .build()
            .unwrap();
        assert_eq!(s.conversation().turns[0].text, "Be terse.");
        assert_eq!(s.provider_context()[0].content, "Be terse.");
    }

    #[test]
    fn same_seed_same_stream() {
        use rand::RngCore;
        let mut a = session(9);
        let mut b = session(9);
        assert_eq!(a.rng.next_u64(), b.rng.next_u64());
    }

    #[test]
    fn seeded_ids_are_stable() {
        assert_eq!(seeded_id(42), seeded_id(42));
        assert_ne!(seeded_id(42), seeded_id(43));
    }

    #[tokio::test]
    async fn empty_message_rejected() {
        let mut s = session(1);
        let p = ScriptedProvider::new(["Hi!"]);
        assert!(matches!(
            s.user_turn("   ", &p, &mut |_| {}).await,
            Err(SessionError::EmptyMessage)
        ));
        assert_eq!(s.conversation().turns.len(), 1);
    }

    #[tokio::test]
    async fn happy_path_appends_user_and_agent() {
        let mut s = session(1);
        let p = ScriptedProvider::new(["Sounds lovely! What did you do?"]);
        let mut events = Vec::new();
        let out = s
            .user_turn("I went to the park today.", &p, &mut |e| events.push(e.name()))
            .await
            .unwrap();
        assert!(out.feedback.is_none());
        let roles: Vec<Role> = s.conversation().turns.iter().map(|t| t.role).collect();
        assert_eq!(roles, [Role::SystemPrompt, Role::User, Role::Agent]);
        assert_eq!(events, ["user_turn", "candidate_scored", "agent_turn"]);
        assert_eq!(out.agent.turn_index, 2);
    }

    #[test]
    fn stepping_and_scheduled_clocks() {
        let c = SteppingClock::fixed();
        let a = c.now();
        let b = c.now();
        assert_eq!((b - a).num_seconds(), 1);
        let s = ScheduledClock::new(vec![a, b]);
        assert_eq!((s.now(), s.now(), s.now()), (a, b, b));
    }
}
