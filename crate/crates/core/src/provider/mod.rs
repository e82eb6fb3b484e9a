//! Access to the speaking model.

mod http;
mod mock;

use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ObserverConfig;
use crate::types::Role;

pub use http::{HttpProvider, ENV_API_BASE, ENV_API_KEY, ENV_MODEL};
pub use mock::ScriptedProvider;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Self {
            role,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSettings {
    pub model_name: String,
    pub temperature: f64,
}

impl Default for GenerationSettings {
    fn default() -> Self {
        Self {
            model_name: "gpt-3.5-turbo".into(),
            temperature: 0.7,
        }
    }
}

impl GenerationSettings {
    /// Defaults, with the model name taken from `PARLEY_MODEL` when set.
    pub fn from_env() -> Self {
        let mut s = Self::default();
        if let Ok(model) = std::env::var(ENV_MODEL) {
            if !model.trim().is_empty() {
                s.model_name = model;
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub messages: Vec<ChatMessage>,
    pub max_completion_tokens: u32,
    pub temperature: f64,
    pub model_name: String,
}

impl CompletionRequest {
    /// The completion budget is always the configured hard token limit.
    pub fn new(messages: Vec<ChatMessage>, cfg: &ObserverConfig, settings: &GenerationSettings) -> Self {
        debug_assert!(messages.first().is_some_and(|m| m.role == Role::SystemPrompt));
        Self {
            messages,
            max_completion_tokens: cfg.token_hard_limit,
            temperature: settings.temperature,
            model_name: settings.model_name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResponse {
    pub text: String,
    pub completion_tokens: Option<u32>,
    pub latency: Duration,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProviderError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited (retry after {retry_after:?})")]
    RateLimited { retry_after: Option<Duration> },
    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed completion payload: {0}")]
    Malformed(String),
    #[error("request timed out after {0:?}")]
    Timeout(Duration),
    #[error("provider misconfigured: {0}")]
    Config(String),
}

#[async_trait]
pub trait ChatProvider: Send + Sync {
    async fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, ProviderError>;
}

#[async_trait]
impl<P: ChatProvider + ?Sized> ChatProvider for std::sync::Arc<P> {
    async fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, ProviderError> {
        (**self).complete(req).await
    }
}
