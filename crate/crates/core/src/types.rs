use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::config::ObserverConfig;
use crate::metrics::MetricReport;
use crate::observer::FeedbackEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    User,
    Agent,
    SystemPrompt,
    ObserverFeedback,
}

/// A generated response that was scored and then not used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub text: String,
    pub metrics: MetricReport,
}

/// One line of a transcript. Serialized field names are part of the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Turn {
    #[serde(rename = "i")]
    pub turn_index: u32,
    pub role: Role,
    pub text: String,
    #[serde(rename = "tokens")]
    pub completion_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<FeedbackEvent>,
    #[serde(rename = "regens")]
    pub regeneration_attempts: u32,
    #[serde(rename = "discarded", default, skip_serializing_if = "Vec::is_empty")]
    pub discarded_candidates: Vec<Candidate>,
    #[serde(rename = "ts", with = "rfc3339")]
    pub timestamp: DateTime<Utc>,
}

impl Turn {
    /// A turn without metrics, feedback or regenerations.
    pub fn plain(turn_index: u32, role: Role, text: impl Into<String>, tokens: u32, ts: DateTime<Utc>) -> Self {
        Self {
            turn_index,
            role,
            text: text.into(),
            completion_tokens: tokens,
            metrics: None,
            feedback: None,
            regeneration_attempts: 0,
            discarded_candidates: Vec::new(),
            timestamp: ts,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conversation {
    pub id: String,
    pub system_prompt: String,
    pub turns: Vec<Turn>,
    pub config_snapshot: ObserverConfig,
    pub rng_seed: u64,
}

impl Conversation {
    pub fn next_index(&self) -> u32 {
        self.turns.len() as u32
    }

    pub fn agent_turns(&self) -> impl Iterator<Item = &Turn> {
        self.turns.iter().filter(|t| t.role == Role::Agent)
    }

    /// The exchange (user text then agent text) that ended most recently before
    /// `turn_position`, joined by a newline. Coherence is measured against it.
    pub fn previous_exchange(&self, turn_position: usize) -> Option<String> {
        let before = &self.turns[..turn_position.min(self.turns.len())];
        let mut agent_seen = false;
        let mut exchange_agent = None;
        for (pos, t) in before.iter().enumerate().rev() {
            match t.role {
                Role::User if !agent_seen => continue,
                Role::Agent if !agent_seen => {
                    agent_seen = true;
                    exchange_agent = Some(pos);
                }
                Role::User => {
                    let agent = &before[exchange_agent.unwrap()];
                    return Some(format!("{}\n{}", t.text, agent.text));
                }
                _ => {}
            }
        }
        None
    }
}

pub(crate) mod rfc3339 {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn format(ts: &DateTime<Utc>) -> String {
        ts.to_rfc3339_opts(SecondsFormat::AutoSi, true)
    }

    pub fn serialize<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(ts))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&raw)
            .map(|t| t.with_timezone(&Utc))
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn ts() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap()
    }

    #[test]
    fn role_names() {
        let names: Vec<String> = [Role::User, Role::Agent, Role::SystemPrompt, Role::ObserverFeedback]
            .iter()
            .map(|r| serde_json::to_string(r).unwrap())
            .collect();
        assert_eq!(names, ["\"user\"", "\"agent\"", "\"system_prompt\"", "\"observer_feedback\""]);
    }

    #[test]
    fn previous_exchange_skips_feedback_and_pending_user() {
        let mut c = Conversation {
            id: "c".into(),
            system_prompt: "p".into(),
            turns: vec![Turn::plain(0, Role::SystemPrompt, "p", 0, ts())],
            config_snapshot: ObserverConfig::default(),
            rng_seed: 1,
        };
        c.turns.push(Turn::plain(1, Role::User, "hi", 1, ts()));
        assert_eq!(c.previous_exchange(2), None);
        c.turns.push(Turn::plain(2, Role::Agent, "hello", 1, ts()));
        c.turns.push(Turn::plain(3, Role::ObserverFeedback, "fb", 0, ts()));
        c.turns.push(Turn::plain(4, Role::User, "how are you", 3, ts()));
        assert_eq!(c.previous_exchange(5).as_deref(), Some("hi\nhello"));
        assert_eq!(c.previous_exchange(2), None);
    }

    #[test]
    fn timestamp_format() {
        assert_eq!(rfc3339::format(&ts()), "2024-01-01T00:00:00Z");
    }
}
