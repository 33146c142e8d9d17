//! Uniform interface to chat-completion and embedding model endpoints.
//!
//! Backends implement [`ChatBackend`] and/or [`EmbedBackend`]. Three families
//! ship here:
//!
//! - [`HttpBackend`] — OpenAI-compatible `/v1/chat/completions` and
//!   `/v1/embeddings` over HTTP, with retry, exponential backoff, and a
//!   shared sliding-window rate limiter.
//! - [`ScriptedBackend`] / [`IdentityEmbedder`] — strict-order test doubles.
//! - [`SimChatBackend`] / [`SimEmbedder`] — deterministic simulators whose
//!   output is a pure function of (seed, request), for offline runs that must
//!   be reproducible regardless of scheduling.
//!
//! Credentials come only from environment configuration and are never
//! included in errors or logs.

mod http;
mod limiter;
mod scripted;
mod sim;

pub use http::HttpBackend;
pub use limiter::RateLimiter;
pub use scripted::{IdentityEmbedder, ScriptedBackend};
pub use sim::{mix_seed, SimChatBackend, SimEmbedder};

use std::time::Duration;

/// A chat-completion request.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChatRequest {
    pub system_prompt: String,
    pub user_prompt: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub model_name: String,
}

impl ChatRequest {
    /// Build a request, enforcing `temperature ∈ [0, 1]` and
    /// `max_output_tokens > 0`.
    pub fn new(
        system_prompt: impl Into<String>,
        user_prompt: impl Into<String>,
        temperature: f64,
        max_output_tokens: u32,
        model_name: impl Into<String>,
    ) -> Result<Self, GatewayError> {
        if !(0.0..=1.0).contains(&temperature) {
            return Err(GatewayError::InvalidRequest(format!(
                "temperature {temperature} outside [0, 1]"
            )));
        }
        if max_output_tokens == 0 {
            return Err(GatewayError::InvalidRequest(
                "max_output_tokens must be positive".to_string(),
            ));
        }
        Ok(Self {
            system_prompt: system_prompt.into(),
            user_prompt: user_prompt.into(),
            temperature,
            max_output_tokens,
            model_name: model_name.into(),
        })
    }
}

/// Decoding parameters for one agent role, used to stamp out requests.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AgentProfile {
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl AgentProfile {
    pub fn new(model_name: impl Into<String>, temperature: f64, max_output_tokens: u32) -> Self {
        Self {
            model_name: model_name.into(),
            temperature,
            max_output_tokens,
        }
    }

    pub fn request(&self, user_prompt: impl Into<String>) -> Result<ChatRequest, GatewayError> {
        ChatRequest::new(
            "",
            user_prompt,
            self.temperature,
            self.max_output_tokens,
            self.model_name.clone(),
        )
    }
}

/// Prompt/completion token counts reported by an endpoint.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// A completion returned by a backend, verbatim.
#[derive(Debug, Clone)]
pub struct ModelResponse {
    pub text: String,
    pub usage: TokenUsage,
    pub latency: Duration,
}

/// Retry and rate-limit policy for HTTP backends.
///
/// The backoff before retry `k + 1` is `base_backoff × 2^k`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_backoff: Duration,
    pub max_requests_per_minute: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_backoff: Duration::from_millis(500),
            max_requests_per_minute: 60,
        }
    }
}

impl RetryPolicy {
    /// Backoff to sleep after failed attempt `attempt` (0-based).
    pub fn backoff_after(&self, attempt: u32) -> Duration {
        self.base_backoff
            .checked_mul(1u32.checked_shl(attempt).unwrap_or(u32::MAX))
            .unwrap_or(Duration::MAX)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { message: String, attempts: u32 },
    #[error("authentication rejected by endpoint (status {status})")]
    Auth { status: u16 },
    #[error("endpoint error (status {status}): {message}")]
    Api { status: u16, message: String },
    #[error("endpoint response not in the expected shape: {0}")]
    MalformedResponse(String),
    #[error("scripted backend exhausted after {calls} call(s)")]
    ScriptExhausted { calls: usize },
    #[error("embed requires at least one input text")]
    EmptyInput,
    #[error("embedding row {row} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("credential environment variable {env_var} is not set")]
    MissingCredential { env_var: String },
}

/// A chat-completion endpoint.
///
/// Implementations return the endpoint's completion text verbatim. Transport
/// retries live behind this interface; schema-level repair of completion
/// content does not (that belongs to the parsing layer).
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ModelResponse, GatewayError>;
}

/// An embedding endpoint.
///
/// Returns one unit-norm vector per input text, row `i` corresponding to
/// `texts[i]`. Rows are re-normalized client-side so cosine similarity
/// reduces to a dot product downstream.
pub trait EmbedBackend: Send + Sync {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for &T {
    fn complete(&self, request: &ChatRequest) -> Result<ModelResponse, GatewayError> {
        (**self).complete(request)
    }
}

impl<T: ChatBackend + ?Sized> ChatBackend for std::sync::Arc<T> {
    fn complete(&self, request: &ChatRequest) -> Result<ModelResponse, GatewayError> {
        (**self).complete(request)
    }
}

impl<T: EmbedBackend + ?Sized> EmbedBackend for &T {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError> {
        (**self).embed(texts)
    }
}

impl<T: EmbedBackend + ?Sized> EmbedBackend for std::sync::Arc<T> {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError> {
        (**self).embed(texts)
    }
}

pub(crate) fn whitespace_token_count(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

/// Normalize every row to unit Euclidean norm, rejecting ragged or zero rows.
pub(crate) fn normalize_rows(mut rows: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>, GatewayError> {
    let expected = rows.first().map(|r| r.len()).unwrap_or(0);
    for (i, row) in rows.iter_mut().enumerate() {
        if row.len() != expected {
            return Err(GatewayError::DimensionMismatch {
                row: i,
                expected,
                got: row.len(),
            });
        }
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(GatewayError::MalformedResponse(format!(
                "embedding row {i} has non-normalizable norm {norm}"
            )));
        }
        for x in row.iter_mut() {
            *x /= norm;
        }
    }
    Ok(rows)
}
