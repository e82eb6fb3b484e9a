use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use async_trait::async_trait;

use super::{ChatProvider, CompletionRequest, CompletionResponse, ProviderError};
use crate::textproc::tokenize;

/// Replays a fixed list of responses in order, wrapping around at the end, and keeps
/// every request it receives.
#[derive(Debug)]
pub struct ScriptedProvider {
    responses: Vec<String>,
    cursor: AtomicUsize,
    log: Mutex<Vec<CompletionRequest>>,
}

impl ScriptedProvider {
    /// Panics if `responses` is empty.
    pub fn new<S: Into<String>>(responses: impl IntoIterator<Item = S>) -> Self {
        let responses: Vec<String> = responses.into_iter().map(Into::into).collect();
        assert!(!responses.is_empty(), "scripted provider needs at least one response");
        Self {
            responses,
            cursor: AtomicUsize::new(0),
            log: Mutex::new(Vec::new()),
        }
    }

    /// One response per non-empty line; lines starting with `#` are comments.
    pub fn from_script(script: &str) -> Result<Self, ProviderError> {
        let lines: Vec<&str> = script
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .collect();
        if lines.is_empty() {
            return Err(ProviderError::Config("mock script has no responses".into()));
        }
        Ok(Self::new(lines))
    }

    pub fn requests(&self) -> Vec<CompletionRequest> {
        self.log.lock().expect("request log poisoned").clone()
    }

    pub fn calls(&self) -> usize {
        self.log.lock().expect("request log poisoned").len()
    }
}

#[async_trait]
impl ChatProvider for ScriptedProvider {
    async fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, ProviderError> {
        self.log.lock().expect("request log poisoned").push(req.clone());
        let i = self.cursor.fetch_add(1, Ordering::SeqCst) % self.responses.len();
        let text = self.responses[i].clone();
        let tokens = tokenize(&text).len() as u32;
        Ok(CompletionResponse {
            text,
            completion_tokens: Some(tokens),
            latency: Duration::ZERO,
        })
    }
}
