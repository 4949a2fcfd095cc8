//! Chat-completion client: HTTP with retries, or canned fixture replies.

use std::path::PathBuf;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::prompts::ChatRequest;

pub const API_KEY_VAR: &str = "TLP_API_KEY";
pub const ENDPOINT_VAR: &str = "TLP_ENDPOINT";
pub const DEFAULT_MODEL: &str = "Meta-Llama-3-8B-Instruct";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChatResponse {
    pub content: String,
    pub finish_reason: Option<String>,
    pub usage: Option<Usage>,
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("transport failure after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("endpoint returned HTTP {status}: {excerpt}")]
    Status { status: u16, excerpt: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("no fixture for request digest {digest} (looked for {path})")]
    FixtureMiss { digest: String, path: PathBuf },
    #[error("reading fixture {path}: {source}")]
    Fixture { path: PathBuf, source: std::io::Error },
}

/// Exponential backoff: retry `n` waits `base_delay * 2^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 3, base_delay: Duration::from_secs(1) }
    }
}

impl RetryPolicy {
    pub fn delay(&self, retry: u32) -> Duration {
        self.base_delay * 2u32.saturating_pow(retry)
    }
}

#[derive(Clone, Debug)]
pub enum Backend {
    Http { base_url: String, api_key: Option<String> },
    Mock { dir: PathBuf },
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub struct LlmClient {
    backend: Backend,
    model: String,
    retry: RetryPolicy,
    http: Option<reqwest::blocking::Client>,
}

impl LlmClient {
    pub fn new(backend: Backend, model: impl Into<String>) -> Self {
        let http = match backend {
            Backend::Http { .. } => Some(
                reqwest::blocking::Client::builder()
                    .timeout(Duration::from_secs(300))
                    .build()
                    .expect("HTTP client builds"),
            ),
            Backend::Mock { .. } => None,
        };
        LlmClient { backend, model: model.into(), retry: RetryPolicy::default(), http }
    }

    pub fn mock(dir: impl Into<PathBuf>) -> Self {
        Self::new(Backend::Mock { dir: dir.into() }, DEFAULT_MODEL)
    }

    /// HTTP backend; the key is read from `TLP_API_KEY` when present.
    pub fn http(base_url: impl Into<String>) -> Self {
        let api_key = std::env::var(API_KEY_VAR).ok().filter(|k| !k.is_empty());
        Self::new(Backend::Http { base_url: base_url.into(), api_key }, DEFAULT_MODEL)
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, ClientError> {
        match &self.backend {
            Backend::Mock { dir } => {
                let digest = sha256_hex(req.final_user_content());
                let path = dir.join(format!("{digest}.txt"));
                match std::fs::read_to_string(&path) {
                    Ok(content) => Ok(ChatResponse { content, finish_reason: Some("stop".into()), usage: None }),
                    Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                        Err(ClientError::FixtureMiss { digest, path })
                    }
                    Err(source) => Err(ClientError::Fixture { path, source }),
                }
            }
            Backend::Http { base_url, api_key } => self.post(base_url, api_key.as_deref(), req),
        }
    }

    fn post(&self, base_url: &str, api_key: Option<&str>, req: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let http = self.http.as_ref().expect("HTTP backend has a client");
        let url = format!("{}/chat/completions", base_url.trim_end_matches('/'));
        let body = json!({
            "model": self.model,
            "messages": req.messages,
            "temperature": req.temperature,
            "top_p": req.top_p,
            "max_tokens": req.max_tokens,
        });
        let mut attempt = 0;
        loop {
            let mut call = http.post(&url).json(&body);
            if let Some(key) = api_key {
                call = call.bearer_auth(key);
            }
            let retryable = match call.send() {
                Ok(resp) if resp.status().is_success() => {
                    let text = resp.text().map_err(|e| ClientError::Malformed(e.to_string()))?;
                    return parse_completion(&text);
                }
                Ok(resp) if resp.status().is_server_error() => {
                    let status = resp.status().as_u16();
                    let excerpt = excerpt(&resp.text().unwrap_or_default());
                    ClientError::Status { status, excerpt }
                }
                Ok(resp) => {
                    let status = resp.status().as_u16();
                    return Err(ClientError::Status { status, excerpt: excerpt(&resp.text().unwrap_or_default()) });
                }
                Err(e) => ClientError::Transport { attempts: attempt + 1, message: e.to_string() },
            };
            if attempt >= self.retry.max_retries {
                return Err(retryable);
            }
            log::warn!("chat request failed ({retryable}); retrying");
            thread::sleep(self.retry.delay(attempt));
            attempt += 1;
        }
    }
}

fn excerpt(body: &str) -> String {
    body.chars().take(200).collect()
}

fn parse_completion(text: &str) -> Result<ChatResponse, ClientError> {
    #[derive(Deserialize)]
    struct Body {
        choices: Vec<Choice>,
        usage: Option<Usage>,
    }
    #[derive(Deserialize)]
    struct Choice {
        message: Content,
        finish_reason: Option<String>,
    }
    #[derive(Deserialize)]
    struct Content {
        content: Option<String>,
    }
    let body: Body = serde_json::from_str(text).map_err(|e| ClientError::Malformed(e.to_string()))?;
    let choice = body.choices.into_iter().next().ok_or_else(|| ClientError::Malformed("no choices".into()))?;
    Ok(ChatResponse {
        content: choice.message.content.unwrap_or_default(),
        finish_reason: choice.finish_reason,
        usage: body.usage,
    })
}
