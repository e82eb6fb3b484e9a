use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use super::{ChatMessage, ChatProvider, CompletionRequest, CompletionResponse, ProviderError};
use crate::types::Role;

pub const ENV_API_BASE: &str = "PARLEY_API_BASE";
pub const ENV_API_KEY: &str = "PARLEY_API_KEY";
pub const ENV_MODEL: &str = "PARLEY_MODEL";

const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
const BODY_EXCERPT: usize = 512;

/// Client for any endpoint speaking the chat-completions wire format.
#[derive(Debug, Clone)]
pub struct HttpProvider {
    client: reqwest::Client,
    base_url: String,
    api_key: Option<String>,
    timeout: Duration,
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    max_tokens: u32,
    temperature: f64,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireContent,
}

#[derive(Deserialize)]
struct WireContent {
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    completion_tokens: Option<u32>,
}

/// Observer feedback travels in the wire's system slot.
pub fn wire_role(role: Role) -> &'static str {
    match role {
        Role::SystemPrompt | Role::ObserverFeedback => "system",
        Role::User => "user",
        Role::Agent => "assistant",
    }
}

/// The JSON body sent for `req`.
pub fn wire_body(req: &CompletionRequest) -> serde_json::Value {
    let body = WireRequest {
        model: &req.model_name,
        messages: req
            .messages
            .iter()
            .map(|m: &ChatMessage| WireMessage {
                role: wire_role(m.role),
                content: &m.content,
            })
            .collect(),
        max_tokens: req.max_completion_tokens,
        temperature: req.temperature,
    };
    serde_json::to_value(body).expect("wire request serializes")
}

impl HttpProvider {
    pub fn new(base_url: impl Into<String>, api_key: Option<String>) -> Self {
        Self {
            client: reqwest::Client::new(),
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
            timeout: DEFAULT_TIMEOUT,
        }
    }

    /// Reads `PARLEY_API_BASE` (required) and `PARLEY_API_KEY` (optional).
    pub fn from_env() -> Result<Self, ProviderError> {
        let base = std::env::var(ENV_API_BASE)
            .map_err(|_| ProviderError::Config(format!("{ENV_API_BASE} is not set")))?;
        let key = std::env::var(ENV_API_KEY).ok().filter(|k| !k.is_empty());
        Ok(Self::new(base, key))
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url)
    }
}

fn retry_after(headers: &reqwest::header::HeaderMap) -> Option<Duration> {
    headers
        .get(reqwest::header::RETRY_AFTER)?
        .to_str()
        .ok()?
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|s| s.is_finite() && *s >= 0.0)
        .map(Duration::from_secs_f64)
}

fn excerpt(body: &str) -> String {
    body.chars().take(BODY_EXCERPT).collect()
}

#[async_trait]
impl ChatProvider for HttpProvider {
    async fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, ProviderError> {
        let started = Instant::now();
        let mut builder = self
            .client
            .post(self.endpoint())
            .timeout(self.timeout)
            .json(&wire_body(req));
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let map_send = |e: reqwest::Error| {
            if e.is_timeout() {
                ProviderError::Timeout(self.timeout)
            } else {
                ProviderError::Transport(e.to_string())
            }
        };
        let resp = builder.send().await.map_err(map_send)?;
        let status = resp.status();
        if status == reqwest::StatusCode::TOO_MANY_REQUESTS {
            return Err(ProviderError::RateLimited {
                retry_after: retry_after(resp.headers()),
            });
        }
        let body = resp.text().await.map_err(map_send)?;
        if !status.is_success() {
            return Err(ProviderError::Status {
                status: status.as_u16(),
                body: excerpt(&body),
            });
        }
        let parsed: WireResponse =
            serde_json::from_str(&body).map_err(|e| ProviderError::Malformed(e.to_string()))?;
        let text = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| ProviderError::Malformed("no choices[0].message.content".into()))?;
        Ok(CompletionResponse {
            text,
            completion_tokens: parsed.usage.and_then(|u| u.completion_tokens),
            latency: started.elapsed(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ObserverConfig;
    use crate::provider::GenerationSettings;
    use std::sync::{Arc, Mutex};

    use axum::extract::State;
    use axum::http::{HeaderMap, StatusCode};
    use axum::response::IntoResponse;
    use axum::routing::post;
    use axum::{Json, Router};

    type Captured = Arc<Mutex<Vec<serde_json::Value>>>;

    async fn serve(router: Router) -> String {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        tokio::spawn(async move { axum::serve(listener, router).await.unwrap() });
        format!("http://{addr}/v1")
    }

    fn request() -> CompletionRequest {
        CompletionRequest::new(
            vec![
                ChatMessage::new(Role::SystemPrompt, "Base prompt."),
                ChatMessage::new(Role::ObserverFeedback, "Be brief."),
                ChatMessage::new(Role::User, "Hi"),
            ],
            &ObserverConfig::default(),
            &GenerationSettings::default(),
        )
    }

    #[tokio::test]
    async fn success_and_request_shape() {
        let captured: Captured = Arc::default();
        let router = Router::new()
            .route(
                "/v1/chat/completions",
                post(|State(c): State<Captured>, headers: HeaderMap, Json(body): Json<serde_json::Value>| async move {
                    assert_eq!(headers["authorization"], "Bearer k");
                    c.lock().unwrap().push(body);
                    Json(serde_json::json!({
                        "choices": [{"message": {"role": "assistant", "content": "Hello!"}}],
                        "usage": {"completion_tokens": 3}
                    }))
                }),
            )
            .with_state(captured.clone());
        let base = serve(router).await;
        let p = HttpProvider::new(base, Some("k".into()));
        let r = p.complete(&request()).await.unwrap();
        assert_eq!(r.text, "Hello!");
        assert_eq!(r.completion_tokens, Some(3));

        let body = captured.lock().unwrap()[0].clone();
        assert_eq!(body["model"], "gpt-3.5-turbo");
        assert_eq!(body["max_tokens"], 120);
        let msgs = body["messages"].as_array().unwrap();
        assert_eq!(msgs[0]["role"], "system");
        assert_eq!(msgs[1], serde_json::json!({"role": "system", "content": "Be brief."}));
        assert_eq!(msgs[2]["role"], "user");
    }

    #[tokio::test]
    async fn rate_limit_carries_retry_after() {
        let router = Router::new().route(
            "/v1/chat/completions",
            post(|| async { (StatusCode::TOO_MANY_REQUESTS, [("retry-after", "7")], "slow down").into_response() }),
        );
        let p = HttpProvider::new(serve(router).await, None);
        assert_eq!(
            p.complete(&request()).await.unwrap_err(),
            ProviderError::RateLimited {
                retry_after: Some(Duration::from_secs(7))
            }
        );
    }

    #[tokio::test]
    async fn status_malformed_and_timeout_are_distinct() {
        let router = Router::new()
            .route("/a/chat/completions", post(|| async { (StatusCode::INTERNAL_SERVER_ERROR, "boom").into_response() }))
            .route("/b/chat/completions", post(|| async { "{\"choices\": []}" }))
            .route(
                "/c/chat/completions",
                post(|| async {
                    tokio::time::sleep(Duration::from_secs(5)).await;
                    "late"
                }),
            );
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        tokio::spawn(async move { axum::serve(listener, router).await.unwrap() });

        let a = HttpProvider::new(format!("http://{addr}/a"), None);
        assert_eq!(
            a.complete(&request()).await.unwrap_err(),
            ProviderError::Status {
                status: 500,
                body: "boom".into()
            }
        );
        let b = HttpProvider::new(format!("http://{addr}/b"), None);
        assert!(matches!(b.complete(&request()).await, Err(ProviderError::Malformed(_))));
        let c = HttpProvider::new(format!("http://{addr}/c"), None).with_timeout(Duration::from_millis(100));
        assert!(matches!(c.complete(&request()).await, Err(ProviderError::Timeout(_))));
    }

    #[tokio::test]
    async fn connection_refused_is_transport() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let p = HttpProvider::new(format!("http://{addr}"), None);
        assert!(matches!(p.complete(&request()).await, Err(ProviderError::Transport(_))));
    }
}
