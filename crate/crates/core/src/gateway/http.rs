//! OpenAI-compatible HTTP backend for chat completions and embeddings.

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::json;

use super::{
    normalize_rows, ChatBackend, ChatRequest, EmbedBackend, GatewayError, ModelResponse,
    RateLimiter, RetryPolicy, TokenUsage,
};

/// API credential kept out of Debug output. Credentials are read only from
/// environment configuration.
#[derive(Clone)]
struct ApiKey(String);

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey(***)")
    }
}

/// Client for any endpoint speaking the OpenAI-compatible
/// `/v1/chat/completions` and `/v1/embeddings` JSON shapes.
///
/// Transient transport failures (connect errors, timeouts, 429, 5xx) are
/// retried per [`RetryPolicy`] with exponential backoff; authentication
/// failures and other endpoint rejections are not.
#[derive(Debug)]
pub struct HttpBackend {
    base_url: String,
    model_name: String,
    api_key: Option<ApiKey>,
    retry: RetryPolicy,
    limiter: Arc<RateLimiter>,
    client: reqwest::blocking::Client,
}

enum AttemptError {
    Retryable(String),
    Fatal(GatewayError),
}

impl HttpBackend {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        let retry = RetryPolicy::default();
        let limiter = Arc::new(RateLimiter::new(retry.max_requests_per_minute));
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            model_name: model_name.into(),
            api_key: None,
            retry,
            limiter,
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(120))
                .build()
                .expect("default TLS backend available"),
        }
    }

    /// Read the credential from the named environment variable.
    pub fn with_api_key_env(mut self, env_var: &str) -> Result<Self, GatewayError> {
        let key = std::env::var(env_var).map_err(|_| GatewayError::MissingCredential {
            env_var: env_var.to_string(),
        })?;
        self.api_key = Some(ApiKey(key));
        Ok(self)
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.limiter = Arc::new(RateLimiter::new(retry.max_requests_per_minute));
        self.retry = retry;
        self
    }

    /// Share one rate limiter across several backends hitting the same host.
    pub fn with_limiter(mut self, limiter: Arc<RateLimiter>) -> Self {
        self.limiter = limiter;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .expect("default TLS backend available");
        self
    }

    fn post(&self, path: &str, body: serde_json::Value) -> Result<serde_json::Value, AttemptError> {
        let mut request = self
            .client
            .post(format!("{}{path}", self.base_url))
            .header("content-type", "application/json");
        if let Some(key) = &self.api_key {
            request = request.header("authorization", format!("Bearer {}", key.0));
        }
        let response = request
            .json(&body)
            .send()
            .map_err(|e| AttemptError::Retryable(e.to_string()))?;

        let status = response.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(AttemptError::Fatal(GatewayError::Auth {
                status: status.as_u16(),
            }));
        }
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(AttemptError::Retryable(format!("status {status}")));
        }
        if !status.is_success() {
            let message = response.text().unwrap_or_default();
            return Err(AttemptError::Fatal(GatewayError::Api {
                status: status.as_u16(),
                message: message.chars().take(400).collect(),
            }));
        }
        response
            .json()
            .map_err(|e| AttemptError::Fatal(GatewayError::MalformedResponse(e.to_string())))
    }

    fn with_retry_loop<T>(
        &self,
        mut attempt_fn: impl FnMut() -> Result<T, AttemptError>,
    ) -> Result<T, GatewayError> {
        let mut last_message = String::new();
        for attempt in 0..self.retry.max_attempts.max(1) {
            if attempt > 0 {
                std::thread::sleep(self.retry.backoff_after(attempt - 1));
            }
            self.limiter.acquire();
            match attempt_fn() {
                Ok(value) => return Ok(value),
                Err(AttemptError::Fatal(error)) => return Err(error),
                Err(AttemptError::Retryable(message)) => last_message = message,
            }
        }
        Err(GatewayError::Transport {
            message: last_message,
            attempts: self.retry.max_attempts.max(1),
        })
    }
}

#[derive(Deserialize)]
struct ChatCompletionBody {
    choices: Vec<ChatChoice>,
    #[serde(default)]
    usage: Option<UsageBody>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize, Default)]
struct UsageBody {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

#[derive(Deserialize)]
struct EmbeddingsBody {
    data: Vec<EmbeddingRow>,
}

#[derive(Deserialize)]
struct EmbeddingRow {
    index: usize,
    embedding: Vec<f64>,
}

impl ChatBackend for HttpBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ModelResponse, GatewayError> {
        let model = if request.model_name.is_empty() {
            &self.model_name
        } else {
            &request.model_name
        };
        let mut messages = Vec::with_capacity(2);
        if !request.system_prompt.is_empty() {
            messages.push(json!({"role": "system", "content": request.system_prompt}));
        }
        messages.push(json!({"role": "user", "content": request.user_prompt}));
        let body = json!({
            "model": model,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        });

        self.with_retry_loop(|| {
            let start = Instant::now();
            let value = self.post("/v1/chat/completions", body.clone())?;
            let parsed: ChatCompletionBody = serde_json::from_value(value).map_err(|e| {
                AttemptError::Fatal(GatewayError::MalformedResponse(e.to_string()))
            })?;
            let text = parsed
                .choices
                .into_iter()
                .next()
                .and_then(|c| c.message.content)
                .ok_or_else(|| {
                    AttemptError::Fatal(GatewayError::MalformedResponse(
                        "completion has no message content".to_string(),
                    ))
                })?;
            let usage = parsed.usage.unwrap_or_default();
            Ok(ModelResponse {
                text,
                usage: TokenUsage {
                    prompt_tokens: usage.prompt_tokens,
                    completion_tokens: usage.completion_tokens,
                },
                latency: start.elapsed(),
            })
        })
    }
}

impl EmbedBackend for HttpBackend {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError> {
        if texts.is_empty() {
            return Err(GatewayError::EmptyInput);
        }
        let body = json!({"model": self.model_name, "input": texts});

        self.with_retry_loop(|| {
            let value = self.post("/v1/embeddings", body.clone())?;
            let parsed: EmbeddingsBody = serde_json::from_value(value).map_err(|e| {
                AttemptError::Fatal(GatewayError::MalformedResponse(e.to_string()))
            })?;
            if parsed.data.len() != texts.len() {
                return Err(AttemptError::Fatal(GatewayError::MalformedResponse(
                    format!(
                        "endpoint returned {} embedding rows for {} inputs",
                        parsed.data.len(),
                        texts.len()
                    ),
                )));
            }
            let mut rows = parsed.data;
            rows.sort_by_key(|r| r.index);
            let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r.embedding).collect();
            normalize_rows(rows).map_err(AttemptError::Fatal)
        })
    }
}
