//! Annotated responses and their line-delimited corpus format.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    Human,
    Agent,
}

/// Likert-rated small-talk criteria, 1 to 5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LikertCriterion {
    Brevity,
    Tone,
    Specificity,
    Coherence,
}

impl LikertCriterion {
    pub const ALL: [LikertCriterion; 4] = [
        LikertCriterion::Brevity,
        LikertCriterion::Tone,
        LikertCriterion::Specificity,
        LikertCriterion::Coherence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LikertCriterion::Brevity => "brevity",
            LikertCriterion::Tone => "tone",
            LikertCriterion::Specificity => "specificity",
            LikertCriterion::Coherence => "coherence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Motive {
    Informative,
    Assistive,
    Expressive,
    PersonDirected,
}

impl Motive {
    pub const ALL: [Motive; 4] = [
        Motive::Informative,
        Motive::Assistive,
        Motive::Expressive,
        Motive::PersonDirected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Motive::Informative => "informative",
            Motive::Assistive => "assistive",
            Motive::Expressive => "expressive",
            Motive::PersonDirected => "person_directed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionRatings {
    pub brevity: u8,
    pub tone: u8,
    pub specificity: u8,
    pub coherence: u8,
}

impl CriterionRatings {
    pub fn get(&self, c: LikertCriterion) -> u8 {
        match c {
            LikertCriterion::Brevity => self.brevity,
            LikertCriterion::Tone => self.tone,
            LikertCriterion::Specificity => self.specificity,
            LikertCriterion::Coherence => self.coherence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotiveRatings {
    pub informative: f64,
    pub assistive: f64,
    pub expressive: f64,
    pub person_directed: f64,
}

impl MotiveRatings {
    pub fn get(&self, m: Motive) -> f64 {
        match m {
            Motive::Informative => self.informative,
            Motive::Assistive => self.assistive,
            Motive::Expressive => self.expressive,
            Motive::PersonDirected => self.person_directed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedResponse {
    pub conversation_id: String,
    pub turn_index: u32,
    pub speaker: Speaker,
    pub criteria: CriterionRatings,
    pub motives: MotiveRatings,
}

/// Maps a 1..=5 motive rating onto [0, 1].
pub fn normalize_motive(likert: u8) -> f64 {
    (f64::from(likert.clamp(1, 5)) - 1.0) / 4.0
}

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl AnnotatedResponse {
    pub fn validate(&self) -> Result<(), String> {
        for c in LikertCriterion::ALL {
            let v = self.criteria.get(c);
            if !(1..=5).contains(&v) {
                return Err(format!("{} rating {v} outside 1..=5", c.name()));
            }
        }
        for m in Motive::ALL {
            let v = self.motives.get(m);
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{} rating {v} outside [0, 1]", m.name()));
            }
        }
        Ok(())
    }
}

/// One JSON record per non-blank line.
pub fn parse_annotations(text: &str) -> Result<Vec<AnnotatedResponse>, AnnotationError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fail = |reason: String| AnnotationError::Parse { line: i + 1, reason };
        let rec: AnnotatedResponse = serde_json::from_str(line).map_err(|e| fail(e.to_string()))?;
        rec.validate().map_err(fail)?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_annotations(path: impl AsRef<Path>) -> Result<Vec<AnnotatedResponse>, AnnotationError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| AnnotationError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_annotations(&text)
}

pub fn by_conversation(records: &[AnnotatedResponse]) -> BTreeMap<&str, Vec<&AnnotatedResponse>> {
    let mut out: BTreeMap<&str, Vec<&AnnotatedResponse>> = BTreeMap::new();
    for r in records {
        out.entry(r.conversation_id.as_str()).or_default().push(r);
    }
    out
}
