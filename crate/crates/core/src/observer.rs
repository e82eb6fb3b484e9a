//! Verdicts, corrective prompts and the regeneration loop.
//!
//! A violation is Hard when a criterion crosses its hard bound and Moderate when it
//! only crosses the implicit one. Any Hard violation forces a regeneration. A report
//! with only Moderate violations is forced with probability `force_probability`
//! (one draw from the session stream) and otherwise passed with implicit guidance
//! for the next completion.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ObserverConfig;
use crate::metrics::{Analyzer, MetricReport};
use crate::provider::{
    ChatMessage, ChatProvider, CompletionRequest, GenerationSettings, ProviderError,
};
use crate::types::{Candidate, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Brevity,
    Tone,
    Specificity,
    Coherence,
    Assistance,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::Brevity,
        Criterion::Tone,
        Criterion::Specificity,
        Criterion::Coherence,
        Criterion::Assistance,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Moderate,
    Hard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionViolation {
    pub criterion: Criterion,
    pub severity: Severity,
    pub observed: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "violations", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Implicit(Vec<CriterionViolation>),
    Forced(Vec<CriterionViolation>),
}

impl Verdict {
    pub fn violations(&self) -> &[CriterionViolation] {
        match self {
            Verdict::Pass => &[],
            Verdict::Implicit(v) | Verdict::Forced(v) => v,
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_forced(&self) -> bool {
        matches!(self, Verdict::Forced(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    Implicit,
    Forced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalChoice {
    FirstResponse,
    Regenerated,
    BestOfFailed,
}

/// What the observer did about one response.
///
/// `kind` is `Implicit` whenever `prompt_text` is carried into the next completion:
/// on a first response with Moderate violations, on a regeneration accepted with
/// Moderate violations, and after the budget ran out. A `Forced` event always used at
/// least one regeneration and ended on a compliant response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub kind: FeedbackKind,
    pub violations: Vec<CriterionViolation>,
    pub prompt_text: String,
    pub attempts_used: u32,
    pub final_choice: FinalChoice,
    /// Generation order of the kept response (0 = first response).
    pub chosen_attempt: u32,
}

impl FeedbackEvent {
    pub fn carries_forward(&self) -> bool {
        self.kind == FeedbackKind::Implicit
    }
}

/// Every criterion bound `report` crosses, in criterion order.
pub fn collect_violations(report: &MetricReport, cfg: &ObserverConfig) -> Vec<CriterionViolation> {
    let mut out = Vec::new();
    let mut push = |criterion, severity, observed: f64, bound: f64| {
        out.push(CriterionViolation {
            criterion,
            severity,
            observed,
            bound,
        })
    };

    let tokens = f64::from(report.token_count);
    if report.token_count > cfg.token_hard_limit {
        push(Criterion::Brevity, Severity::Hard, tokens, f64::from(cfg.token_hard_limit));
    } else if report.token_count > cfg.token_implicit_limit {
        push(Criterion::Brevity, Severity::Moderate, tokens, f64::from(cfg.token_implicit_limit));
    }

    let c = report.combined_sentiment;
    if c <= cfg.sentiment_hard_floor {
        push(Criterion::Tone, Severity::Hard, c, cfg.sentiment_hard_floor);
    } else if c < cfg.sentiment_implicit_floor {
        push(Criterion::Tone, Severity::Moderate, c, cfg.sentiment_implicit_floor);
    }

    let s = report.specificity;
    if s > cfg.specificity_hard_ceiling {
        push(Criterion::Specificity, Severity::Hard, s, cfg.specificity_hard_ceiling);
    } else if s > cfg.specificity_implicit_ceiling {
        push(Criterion::Specificity, Severity::Moderate, s, cfg.specificity_implicit_ceiling);
    }

    if let Some(sim) = report
        .centroid_similarity
        .filter(|&sim| sim < cfg.coherence_min_centroid_similarity)
    {
        push(Criterion::Coherence, Severity::Moderate, sim, cfg.coherence_min_centroid_similarity);
    } else if let Some(gain) = report.info_gain.filter(|&g| g > cfg.coherence_max_info_gain) {
        push(Criterion::Coherence, Severity::Moderate, gain, cfg.coherence_max_info_gain);
    }

    if report.assistance_hits >= 1 && report.assistance_cosine >= cfg.assistance_cosine_threshold {
        push(
            Criterion::Assistance,
            Severity::Moderate,
            report.assistance_cosine,
            cfg.assistance_cosine_threshold,
        );
    }
    out
}

fn has_hard(violations: &[CriterionViolation]) -> bool {
    violations.iter().any(|v| v.severity == Severity::Hard)
}

/// Verdict for a first response. Draws from `rng` only when every violation is
/// Moderate.
pub fn judge<R: Rng + ?Sized>(report: &MetricReport, cfg: &ObserverConfig, rng: &mut R) -> Verdict {
    let violations = collect_violations(report, cfg);
    if violations.is_empty() {
        Verdict::Pass
    } else if has_hard(&violations) || rng.random::<f64>() < cfg.force_probability {
        Verdict::Forced(violations)
    } else {
        Verdict::Implicit(violations)
    }
}

/// Verdict for a regenerated response: no random gate, only Hard violations force.
pub fn judge_regeneration(report: &MetricReport, cfg: &ObserverConfig) -> Verdict {
    let violations = collect_violations(report, cfg);
    if violations.is_empty() {
        Verdict::Pass
    } else if has_hard(&violations) {
        Verdict::Forced(violations)
    } else {
        Verdict::Implicit(violations)
    }
}

pub const BREVITY_FEEDBACK: &str =
    "Your response was too long; keep it concise, like a quick reply in casual conversation.";
pub const TONE_FEEDBACK: &str =
    "Your response was overly negative; aim for a neutral or lighthearted tone.";
pub const SPECIFICITY_FEEDBACK: &str =
    "Your response was overly detailed; keep it light and general rather than specific.";
pub const COHERENCE_FEEDBACK: &str =
    "Your response drifted from the topic; stay with what you were just talking about.";
pub const ASSISTANCE_FEEDBACK: &str =
    "Your response sounded like an assistant offering help; chat as a friend instead of offering assistance.";

pub fn feedback_template(criterion: Criterion) -> &'static str {
    match criterion {
        Criterion::Brevity => BREVITY_FEEDBACK,
        Criterion::Tone => TONE_FEEDBACK,
        Criterion::Specificity => SPECIFICITY_FEEDBACK,
        Criterion::Coherence => COHERENCE_FEEDBACK,
        Criterion::Assistance => ASSISTANCE_FEEDBACK,
    }
}

/// One sentence per violated criterion in fixed criterion order; `None` when there
/// is nothing to correct.
pub fn feedback_prompt(violations: &[CriterionViolation]) -> Option<String> {
    let sentences: Vec<&str> = Criterion::ALL
        .iter()
        .filter(|c| violations.iter().any(|v| v.criterion == **c))
        .map(|&c| feedback_template(c))
        .collect();
    (!sentences.is_empty()).then(|| sentences.join(" "))
}

/// `clamp((observed - bad) / (good - bad), 0, 1)`: 1 at or beyond the good end, 0 at
/// or beyond the hard bound.
fn margin(observed: f64, good: f64, bad: f64) -> f64 {
    if good == bad {
        let ok = if good >= bad { observed >= good } else { observed <= good };
        return if ok { 1.0 } else { 0.0 };
    }
    ((observed - bad) / (good - bad)).clamp(0.0, 1.0)
}

/// Ranking used to pick a response once regenerations run out: the mean over the
/// five criteria of a compliance margin in [0, 1]. Brevity runs from `token_target`
/// (1) to twice `token_hard_limit` (0), tone from the implicit floor (1) to -1 (0),
/// specificity from the implicit ceiling (1) to 1 (0). Coherence and assistance
/// score 1 unless violated. Ties keep the earliest candidate.
pub fn composite_score(report: &MetricReport, cfg: &ObserverConfig) -> f64 {
    let violated = collect_violations(report, cfg);
    let flag = |c: Criterion| {
        if violated.iter().any(|v| v.criterion == c) {
            0.0
        } else {
            1.0
        }
    };
    let margins = [
        margin(
            f64::from(report.token_count),
            f64::from(cfg.token_target),
            2.0 * f64::from(cfg.token_hard_limit),
        ),
        margin(
            report.combined_sentiment,
            cfg.sentiment_implicit_floor,
            -1.0,
        ),
        margin(
            report.specificity,
            cfg.specificity_implicit_ceiling,
            1.0,
        ),
        flag(Criterion::Coherence),
        flag(Criterion::Assistance),
    ];
    margins.iter().sum::<f64>() / margins.len() as f64
}

/// A scored candidate, reported as soon as it has a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub attempt: u32,
    pub text: String,
    pub metrics: MetricReport,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Supervision {
    pub text: String,
    pub completion_tokens: u32,
    pub metrics: MetricReport,
    pub feedback: Option<FeedbackEvent>,
    pub regeneration_attempts: u32,
    pub discarded: Vec<Candidate>,
}

#[derive(Debug, Error)]
#[error("provider failed on attempt {attempt}: {source}")]
pub struct SuperviseError {
    pub attempt: u32,
    #[source]
    pub source: ProviderError,
}

struct Generated {
    text: String,
    tokens: u32,
    metrics: MetricReport,
}

/// Runs the observer loop for one user turn against a speaking model.
pub struct Supervisor<'a> {
    pub analyzer: Analyzer<'a>,
    pub settings: &'a GenerationSettings,
}

impl Supervisor<'_> {
    async fn generate(
        &self,
        provider: &dyn ChatProvider,
        messages: Vec<ChatMessage>,
        exchange: Option<&str>,
        attempt: u32,
    ) -> Result<Generated, SuperviseError> {
        let req = CompletionRequest::new(messages, self.analyzer.config, self.settings);
        let resp = provider
            .complete(&req)
            .await
            .map_err(|source| SuperviseError { attempt, source })?;
        let metrics = self.analyzer.analyze(&resp.text, resp.completion_tokens, exchange);
        Ok(Generated {
            tokens: metrics.token_count,
            text: resp.text,
            metrics,
        })
    }

    /// `context` is the full provider context for the first request. `exchange` is
    /// the previous exchange used for coherence. `on_candidate` sees every scored
    /// candidate in generation order.
    ///
    /// Issues at most `1 + max_regenerations` provider calls.
    pub async fn supervise<R: Rng + Send + ?Sized>(
        &self,
        context: &[ChatMessage],
        exchange: Option<&str>,
        provider: &dyn ChatProvider,
        rng: &mut R,
        on_candidate: &mut (dyn FnMut(ScoredCandidate) + Send),
    ) -> Result<Supervision, SuperviseError> {
        let cfg = self.analyzer.config;
        let first = self.generate(provider, context.to_vec(), exchange, 0).await?;
        let verdict = judge(&first.metrics, cfg, rng);
        on_candidate(ScoredCandidate {
            attempt: 0,
            text: first.text.clone(),
            metrics: first.metrics.clone(),
            verdict: verdict.clone(),
        });

        let forced_violations = match verdict {
            Verdict::Pass => return Ok(finish(first, None, 0, Vec::new())),
            Verdict::Implicit(v) => {
                let event = FeedbackEvent {
                    kind: FeedbackKind::Implicit,
                    prompt_text: feedback_prompt(&v).expect("violations are non-empty"),
                    violations: v,
                    attempts_used: 0,
                    final_choice: FinalChoice::FirstResponse,
                    chosen_attempt: 0,
                };
                return Ok(finish(first, Some(event), 0, Vec::new()));
            }
            Verdict::Forced(v) => v,
        };

        let forced_prompt = feedback_prompt(&forced_violations).expect("violations are non-empty");
        let mut last_prompt = forced_prompt.clone();
        let mut candidates = vec![first];
        for attempt in 1..=cfg.max_regenerations {
            let mut messages = context.to_vec();
            let previous = candidates.last().expect("at least one candidate");
            if !previous.text.trim().is_empty() {
                messages.push(ChatMessage::new(Role::Agent, previous.text.clone()));
            }
            messages.push(ChatMessage::new(Role::ObserverFeedback, last_prompt.clone()));
            let next = self.generate(provider, messages, exchange, attempt).await?;
            let verdict = judge_regeneration(&next.metrics, cfg);
            on_candidate(ScoredCandidate {
                attempt,
                text: next.text.clone(),
                metrics: next.metrics.clone(),
                verdict: verdict.clone(),
            });
            match verdict {
                Verdict::Pass => {
                    let event = FeedbackEvent {
                        kind: FeedbackKind::Forced,
                        violations: forced_violations,
                        prompt_text: forced_prompt,
                        attempts_used: attempt,
                        final_choice: FinalChoice::Regenerated,
                        chosen_attempt: attempt,
                    };
                    return Ok(finish(next, Some(event), attempt, discard(candidates)));
                }
                Verdict::Implicit(v) => {
                    let event = FeedbackEvent {
                        kind: FeedbackKind::Implicit,
                        prompt_text: feedback_prompt(&v).expect("violations are non-empty"),
                        violations: v,
                        attempts_used: attempt,
                        final_choice: FinalChoice::Regenerated,
                        chosen_attempt: attempt,
                    };
                    return Ok(finish(next, Some(event), attempt, discard(candidates)));
                }
                Verdict::Forced(v) => {
                    last_prompt = feedback_prompt(&v).expect("violations are non-empty");
                    candidates.push(next);
                }
            }
        }

        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (i, c) in candidates.iter().enumerate() {
            let score = composite_score(&c.metrics, cfg);
            if score > best_score {
                best = i;
                best_score = score;
            }
        }
        let chosen = candidates.remove(best);
        let violations = collect_violations(&chosen.metrics, cfg);
        let event = FeedbackEvent {
            kind: FeedbackKind::Implicit,
            prompt_text: feedback_prompt(&violations).expect("failed candidates have violations"),
            violations,
            attempts_used: cfg.max_regenerations,
            final_choice: FinalChoice::BestOfFailed,
            chosen_attempt: best as u32,
        };
        Ok(finish(chosen, Some(event), cfg.max_regenerations, discard(candidates)))
    }
}

fn discard(candidates: Vec<Generated>) -> Vec<Candidate> {
    candidates
        .into_iter()
        .map(|c| Candidate {
            text: c.text,
            metrics: c.metrics,
        })
        .collect()
}

fn finish(
    kept: Generated,
    feedback: Option<FeedbackEvent>,
    regeneration_attempts: u32,
    discarded: Vec<Candidate>,
) -> Supervision {
    Supervision {
        text: kept.text,
        completion_tokens: kept.tokens,
        metrics: kept.metrics,
        feedback,
        regeneration_attempts,
        discarded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn clean_report() -> MetricReport {
        MetricReport {
            token_count: 20,
            combined_sentiment: 0.3,
            holistic_sentiment: 0.3,
            sentence_sentiments: vec![0.3],
            specificity: 0.1,
            entity_count: 0,
            descriptor_count: 1,
            response_entropy: 1.0,
            previous_entropy: Some(1.0),
            info_gain: Some(0.0),
            centroid_similarity: Some(0.5),
            assistance_hits: 0,
            assistance_cosine: 0.1,
        }
    }

    fn first_draw(seed: u64) -> f64 {
        ChaCha8Rng::seed_from_u64(seed).random::<f64>()
    }

    #[test]
    fn clean_report_passes() {
        let cfg = ObserverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(judge(&clean_report(), &cfg, &mut rng), Verdict::Pass);
    }

    #[test]
    fn very_negative_tone_is_forced_hard() {
        let cfg = ObserverConfig::default();
        let r = MetricReport {
            combined_sentiment: -0.9,
            ..clean_report()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = judge(&r, &cfg, &mut rng);
        assert!(v.is_forced());
        assert_eq!(v.violations().len(), 1);
        assert_eq!(v.violations()[0].criterion, Criterion::Tone);
        assert_eq!(v.violations()[0].severity, Severity::Hard);
    }

    #[test]
    fn floor_is_inclusive() {
        let cfg = ObserverConfig::default();
        let r = MetricReport {
            combined_sentiment: -0.75,
            ..clean_report()
        };
        assert_eq!(collect_violations(&r, &cfg)[0].severity, Severity::Hard);
        let r = MetricReport {
            combined_sentiment: -0.5,
            ..clean_report()
        };
        assert!(collect_violations(&r, &cfg).is_empty());
    }

    // Seeds 3 and 0 give first draws below and above 0.35 respectively.
    const LOW_SEED: u64 = 5;
    const HIGH_SEED: u64 = 0;

    #[test]
    fn pinned_seeds_straddle_default_probability() {
        assert!(first_draw(LOW_SEED) < 0.35, "{}", first_draw(LOW_SEED));
        assert!(first_draw(HIGH_SEED) >= 0.35, "{}", first_draw(HIGH_SEED));
    }

    #[test]
    fn moderate_only_is_gated() {
        let cfg = ObserverConfig::default();
        let r = MetricReport {
            token_count: 95,
            ..clean_report()
        };
        let v = collect_violations(&r, &cfg);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].criterion, v[0].severity), (Criterion::Brevity, Severity::Moderate));
        assert!(judge(&r, &cfg, &mut ChaCha8Rng::seed_from_u64(LOW_SEED)).is_forced());
        assert!(matches!(
            judge(&r, &cfg, &mut ChaCha8Rng::seed_from_u64(HIGH_SEED)),
            Verdict::Implicit(_)
        ));
    }

    #[test]
    fn rng_untouched_without_moderate_only() {
        let cfg = ObserverConfig::default();
        let mut a = ChaCha8Rng::seed_from_u64(5);
        judge(&clean_report(), &cfg, &mut a);
        let hard = MetricReport {
            token_count: 500,
            ..clean_report()
        };
        judge(&hard, &cfg, &mut a);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn each_criterion_bound() {
        let cfg = ObserverConfig::default();
        let cases = [
            (MetricReport { token_count: 121, ..clean_report() }, Criterion::Brevity, Severity::Hard),
            (MetricReport { specificity: 0.7, ..clean_report() }, Criterion::Specificity, Severity::Moderate),
            (MetricReport { specificity: 0.9, ..clean_report() }, Criterion::Specificity, Severity::Hard),
            (MetricReport { combined_sentiment: -0.6, ..clean_report() }, Criterion::Tone, Severity::Moderate),
            (MetricReport { centroid_similarity: Some(0.1), ..clean_report() }, Criterion::Coherence, Severity::Moderate),
            (MetricReport { info_gain: Some(1.5), ..clean_report() }, Criterion::Coherence, Severity::Moderate),
            (
                MetricReport { assistance_hits: 1, assistance_cosine: 0.8, ..clean_report() },
                Criterion::Assistance,
                Severity::Moderate,
            ),
        ];
        for (report, criterion, severity) in cases {
            let v = collect_violations(&report, &cfg);
            assert_eq!(v.len(), 1, "{criterion:?}");
            assert_eq!((v[0].criterion, v[0].severity), (criterion, severity));
        }
        let undefined = MetricReport {
            centroid_similarity: None,
            info_gain: None,
            ..clean_report()
        };
        assert!(collect_violations(&undefined, &cfg).is_empty());
        let hits_only = MetricReport {
            assistance_hits: 2,
            assistance_cosine: 0.2,
            ..clean_report()
        };
        assert!(collect_violations(&hits_only, &cfg).is_empty());
    }

    fn violation(criterion: Criterion, severity: Severity) -> CriterionViolation {
        CriterionViolation {
            criterion,
            severity,
            observed: 0.0,
            bound: 0.0,
        }
    }

    #[test]
    fn prompts() {
        assert_eq!(
            feedback_prompt(&[violation(Criterion::Tone, Severity::Moderate)]).unwrap(),
            "Your response was overly negative; aim for a neutral or lighthearted tone."
        );
        let brevity = feedback_prompt(&[violation(Criterion::Brevity, Severity::Hard)]).unwrap();
        assert!(brevity.contains("concise"));
        let both = feedback_prompt(&[
            violation(Criterion::Tone, Severity::Hard),
            violation(Criterion::Brevity, Severity::Moderate),
        ])
        .unwrap();
        assert_eq!(both, format!("{BREVITY_FEEDBACK} {TONE_FEEDBACK}"));
        assert_eq!(feedback_prompt(&[]), None);
    }

    #[test]
    fn composite_margins() {
        let cfg = ObserverConfig::default();
        assert_eq!(composite_score(&clean_report(), &cfg), 1.0);
        let r = MetricReport {
            combined_sentiment: -0.9,
            ..clean_report()
        };
        // tone (-0.9 + 1) / 0.5 = 0.2
        assert!((composite_score(&r, &cfg) - 0.84).abs() < 1e-12);
        let r = MetricReport {
            combined_sentiment: -0.75,
            token_count: 150,
            ..clean_report()
        };
        // brevity (240 - 150) / 180 = 0.5, tone 0.5
        assert!((composite_score(&r, &cfg) - 0.8).abs() < 1e-12);
        let worse = MetricReport {
            combined_sentiment: -0.95,
            ..r.clone()
        };
        assert!(composite_score(&worse, &cfg) < composite_score(&r, &cfg));
    }

    #[test]
    fn verdict_wire_shape() {
        assert_eq!(serde_json::to_value(Verdict::Pass).unwrap(), serde_json::json!({"kind": "pass"}));
        let v = serde_json::to_value(Verdict::Forced(vec![violation(Criterion::Tone, Severity::Hard)])).unwrap();
        assert_eq!(v["kind"], "forced");
        assert_eq!(v["violations"][0]["criterion"], "tone");
    }
}
