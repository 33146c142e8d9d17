//! Deterministic test doubles: a strict-order scripted chat backend and a
//! per-call one-hot embedder.

use std::collections::{HashMap, VecDeque};
use std::sync::Mutex;
use std::time::Duration;

use super::{
    whitespace_token_count, ChatBackend, ChatRequest, EmbedBackend, GatewayError, ModelResponse,
    TokenUsage,
};

/// Chat backend that replays a fixed queue of canned completions.
///
/// Responses are consumed strictly in order; running past the end is an
/// error. Every request is recorded in a call log for assertions on what
/// the caller actually sent. Calls are serialized internally, so the
/// consumption order is total even when the handle is shared.
pub struct ScriptedBackend {
    state: Mutex<ScriptState>,
}

struct ScriptState {
    responses: VecDeque<String>,
    call_log: Vec<ChatRequest>,
}

impl ScriptedBackend {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            state: Mutex::new(ScriptState {
                responses: responses.into_iter().map(Into::into).collect(),
                call_log: Vec::new(),
            }),
        }
    }

    /// Requests received so far, in call order.
    pub fn call_log(&self) -> Vec<ChatRequest> {
        self.state.lock().unwrap().call_log.clone()
    }

    pub fn calls_made(&self) -> usize {
        self.state.lock().unwrap().call_log.len()
    }

    pub fn remaining(&self) -> usize {
        self.state.lock().unwrap().responses.len()
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ModelResponse, GatewayError> {
        let mut state = self.state.lock().unwrap();
        state.call_log.push(request.clone());
        let calls = state.call_log.len();
        let text = state
            .responses
            .pop_front()
            .ok_or(GatewayError::ScriptExhausted { calls })?;
        let usage = TokenUsage {
            prompt_tokens: whitespace_token_count(&request.system_prompt)
                + whitespace_token_count(&request.user_prompt),
            completion_tokens: whitespace_token_count(&text),
        };
        Ok(ModelResponse {
            text,
            usage,
            latency: Duration::ZERO,
        })
    }
}

/// Test embedder mapping each distinct token in a call to a distinct one-hot
/// basis vector.
///
/// Within a single `embed` call, identical tokens get identical vectors and
/// distinct tokens get orthogonal unit vectors, so cosine similarity is
/// exactly 1 for equal tokens and exactly 0 otherwise. The vocabulary is
/// per-call; callers comparing two token sequences must embed them together.
#[derive(Debug, Default, Clone, Copy)]
pub struct IdentityEmbedder;

impl EmbedBackend for IdentityEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError> {
        if texts.is_empty() {
            return Err(GatewayError::EmptyInput);
        }
        let mut slots: HashMap<&str, usize> = HashMap::new();
        let mut next = 0usize;
        let indices: Vec<usize> = texts
            .iter()
            .map(|t| {
                *slots.entry(t.as_str()).or_insert_with(|| {
                    let slot = next;
                    next += 1;
                    slot
                })
            })
            .collect();
        let dim = next;
        Ok(indices
            .into_iter()
            .map(|slot| {
                let mut row = vec![0.0; dim];
                row[slot] = 1.0;
                row
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(user: &str) -> ChatRequest {
        ChatRequest::new("", user, 0.0, 64, "scripted").unwrap()
    }

    #[test]
    fn replays_responses_in_order() {
        let backend = ScriptedBackend::new(["hello", "world"]);
        assert_eq!(backend.complete(&request("a")).unwrap().text, "hello");
        assert_eq!(backend.complete(&request("b")).unwrap().text, "world");
        let log = backend.call_log();
        assert_eq!(log[0].user_prompt, "a");
        assert_eq!(log[1].user_prompt, "b");
    }

    #[test]
    fn exhaustion_is_an_error() {
        let backend = ScriptedBackend::new(["only one"]);
        backend.complete(&request("a")).unwrap();
        let err = backend.complete(&request("b")).unwrap_err();
        assert!(matches!(err, GatewayError::ScriptExhausted { calls: 2 }));
    }

    #[test]
    fn identity_embedder_is_one_hot() {
        let texts: Vec<String> = ["a", "b", "a"].iter().map(|s| s.to_string()).collect();
        let rows = IdentityEmbedder.embed(&texts).unwrap();
        assert_eq!(rows[0], vec![1.0, 0.0]);
        assert_eq!(rows[1], vec![0.0, 1.0]);
        assert_eq!(rows[2], rows[0]);
        // Distinct tokens are orthogonal.
        let dot: f64 = rows[0].iter().zip(&rows[1]).map(|(x, y)| x * y).sum();
        assert_eq!(dot, 0.0);
    }

    #[test]
    fn identity_embedder_rejects_empty() {
        assert!(matches!(
            IdentityEmbedder.embed(&[]),
            Err(GatewayError::EmptyInput)
        ));
    }

    #[test]
    fn identity_rows_are_unit_norm() {
        let texts: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        for row in IdentityEmbedder.embed(&texts).unwrap() {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-6);
        }
    }
}
