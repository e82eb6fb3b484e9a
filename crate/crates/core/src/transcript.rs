//! Line-delimited JSON transcripts: one header object, then one object per turn.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ObserverConfig;
use crate::types::{Conversation, Role, Turn};

pub const TRANSCRIPT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub version: u32,
    pub id: String,
    pub system_prompt: String,
    pub config: ObserverConfig,
    pub rng_seed: u64,
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("transcript is empty")]
    Empty,
    #[error("transcript io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn parse_err(line: usize, reason: impl Into<String>) -> TranscriptError {
    TranscriptError::Parse {
        line,
        reason: reason.into(),
    }
}

pub fn header_line(c: &Conversation) -> String {
    let header = Header {
        version: TRANSCRIPT_VERSION,
        id: c.id.clone(),
        system_prompt: c.system_prompt.clone(),
        config: c.config_snapshot.clone(),
        rng_seed: c.rng_seed,
    };
    serde_json::to_string(&header).expect("header serializes")
}

pub fn turn_line(t: &Turn) -> String {
    serde_json::to_string(t).expect("turn serializes")
}

pub fn serialize_conversation(c: &Conversation) -> Vec<u8> {
    let mut out = header_line(c);
    out.push('\n');
    for t in &c.turns {
        out.push_str(&turn_line(t));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn parse_conversation(bytes: &[u8]) -> Result<Conversation, TranscriptError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        parse_err(line, "invalid UTF-8")
    })?;
    let mut lines = text.split_terminator('\n').enumerate();
    let (_, first) = lines.next().ok_or(TranscriptError::Empty)?;
    let header: Header =
        serde_json::from_str(first).map_err(|e| parse_err(1, format!("bad header: {e}")))?;
    if header.version != TRANSCRIPT_VERSION {
        return Err(parse_err(1, format!("unsupported version {}", header.version)));
    }
    let mut turns = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let turn: Turn = serde_json::from_str(line).map_err(|e| parse_err(line_no, e.to_string()))?;
        if turn.turn_index as usize != turns.len() {
            return Err(parse_err(
                line_no,
                format!("expected turn index {}, found {}", turns.len(), turn.turn_index),
            ));
        }
        if (turn.role == Role::Agent) != turn.metrics.is_some() {
            return Err(parse_err(line_no, "metrics must be present exactly on agent turns"));
        }
        turns.push(turn);
    }
    Ok(Conversation {
        id: header.id,
        system_prompt: header.system_prompt,
        turns,
        config_snapshot: header.config,
        rng_seed: header.rng_seed,
    })
}

pub fn read_transcript(path: impl AsRef<Path>) -> Result<Conversation, TranscriptError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| TranscriptError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_conversation(&bytes)
}

/// Append-only transcript file. Each line goes out in a single write, so a crash
/// between turns leaves a parseable prefix.
#[derive(Debug)]
pub struct TranscriptWriter {
    path: PathBuf,
    file: File,
}

impl TranscriptWriter {
    /// Creates (or truncates) `path` and writes the header plus any existing turns.
    pub fn create(path: impl Into<PathBuf>, c: &Conversation) -> Result<Self, TranscriptError> {
        let path = path.into();
        let io = |source| TranscriptError::Io {
            path: path.display().to_string(),
            source,
        };
        std::fs::write(&path, serialize_conversation(c)).map_err(io)?;
        let file = OpenOptions::new().append(true).open(&path).map_err(io)?;
        Ok(Self { path, file })
    }

    pub fn append(&mut self, t: &Turn) -> Result<(), TranscriptError> {
        let mut line = turn_line(t);
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|source| TranscriptError::Io {
                path: self.path.display().to_string(),
                source,
            })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}
