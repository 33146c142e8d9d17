//! Deterministic simulation backends for offline runs.
//!
//! Unlike [`ScriptedBackend`](super::ScriptedBackend), whose strict queue
//! makes shared use order-dependent, a simulator's reply is a pure function
//! of (seed, request). Batches running at any concurrency level therefore
//! produce identical per-document outputs, which is what the end-to-end
//! determinism checks rely on.
//!
//! The simulator recognizes what kind of completion is being asked for from
//! instruction markers that the shipped prompt templates carry (the JSON key
//! names, the `WINNER:` line instruction, and so on) and fabricates a
//! plausible reply of that kind.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::time::Duration;

use super::{
    normalize_rows, whitespace_token_count, ChatBackend, ChatRequest, EmbedBackend, GatewayError,
    ModelResponse, TokenUsage,
};
use crate::les::EventRecord;

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Derive a sub-seed for a named role or purpose from a base seed, stable
/// across processes and platforms.
pub fn mix_seed(seed: u64, label: &str) -> u64 {
    seed ^ fnv1a64(label.as_bytes())
}

const SURNAMES: &[&str] = &[
    "Rao", "Mehta", "Iyer", "Banerjee", "Chandran", "Kaul", "Desai", "Nair",
];

const PARTIES: &[&str] = &[
    "Proxima Inc.", "Zenith Corp", "Meridian Trust", "Kestrel Industries", "Aster Mills",
    "Harbor Lines", "Veda Housing", "Northfield Bank",
];

const EVENT_PHRASES: &[&str] = &[
    "the petitioner filed a complaint before the tribunal",
    "the respondent submitted a counter-affidavit disputing the claims",
    "an interim injunction was granted restraining further transfers",
    "the forensic audit report was placed on record",
    "arguments on maintainability were heard at length",
    "the appellate bench reserved its order after final hearing",
    "a settlement proposal was rejected by the appellant",
    "the regulator issued a show-cause notice to the company",
    "expert testimony on valuation was recorded",
    "the matter was referred to a larger bench for clarity",
];

const OPENINGS: &[&str] = &[
    "The present appeal arises from a protracted dispute between the parties concerning",
    "This judgment disposes of connected petitions raising common questions about",
    "The genesis of the dispute traces back to disagreements over",
];

const SUBJECTS: &[&str] = &[
    "corporate governance and the rights of minority shareholders",
    "the recovery of dues under a restructured loan facility",
    "alleged procedural lapses in the grant of statutory clearances",
    "the enforceability of restrictive covenants in service agreements",
];

const CONCLUSIONS: &[&str] = &[
    "In light of the foregoing, the appeal is dismissed with no order as to costs.",
    "Accordingly, the impugned order is set aside and the matter remanded for fresh consideration.",
    "We therefore allow the appeal in part, modifying the relief granted below.",
];

const MONTHS: &[&str] = &[
    "January", "February", "March", "April", "May", "June", "July", "August", "September",
    "October", "November", "December",
];

/// Deterministic chat simulator.
///
/// Replies are derived from a hash of the request text mixed with the
/// configured seed. A request whose user prompt contains the optional
/// `fail_marker` always gets a refusal with no parseable payload, which lets
/// tests force a specific document to fail permanently. With a
/// `prefer_marker` set, fabricated verdicts pick the summary slot whose text
/// contains the marker (a content-consistent judge) instead of choosing
/// pseudo-randomly.
#[derive(Debug, Clone)]
pub struct SimChatBackend {
    seed: u64,
    fail_marker: Option<String>,
    prefer_marker: Option<String>,
}

impl SimChatBackend {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            fail_marker: None,
            prefer_marker: None,
        }
    }

    pub fn with_fail_marker(mut self, marker: impl Into<String>) -> Self {
        self.fail_marker = Some(marker.into());
        self
    }

    pub fn with_prefer_marker(mut self, marker: impl Into<String>) -> Self {
        self.prefer_marker = Some(marker.into());
        self
    }

    fn rng_for(&self, request: &ChatRequest) -> ChaCha8Rng {
        let mut bytes = Vec::with_capacity(
            request.system_prompt.len() + request.user_prompt.len() + 1,
        );
        bytes.extend_from_slice(request.system_prompt.as_bytes());
        bytes.push(0x1f);
        bytes.extend_from_slice(request.user_prompt.as_bytes());
        ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a64(&bytes))
    }

    fn fabricate_timeline(rng: &mut ChaCha8Rng) -> String {
        let count = rng.gen_range(3..=6);
        let mut year = rng.gen_range(2015..=2020);
        let mut month = rng.gen_range(0..12usize);
        let mut events = Vec::with_capacity(count);
        for _ in 0..count {
            let timestamp = format!("{} {}", MONTHS[month], year);
            let phrase = EVENT_PHRASES[rng.gen_range(0..EVENT_PHRASES.len())];
            let event = format!("{phrase} in re {}", PARTIES[rng.gen_range(0..PARTIES.len())]);
            let judge = if rng.gen_bool(0.4) {
                format!("Justice {}", SURNAMES[rng.gen_range(0..SURNAMES.len())])
            } else {
                "N/A".to_string()
            };
            let precedent = if rng.gen_bool(0.4) {
                format!(
                    "{} v. {} {} SCC {}",
                    PARTIES[rng.gen_range(0..PARTIES.len())],
                    PARTIES[rng.gen_range(0..PARTIES.len())],
                    rng.gen_range(1..12),
                    rng.gen_range(100..999)
                )
            } else {
                "N/A".to_string()
            };
            events.push(EventRecord::new(timestamp, event, judge, precedent));
            let advance = rng.gen_range(1..=7usize);
            month += advance;
            year += (month / 12) as i32;
            month %= 12;
        }
        let json = serde_json::to_string_pretty(&events).expect("records serialize");
        format!("Here is the event timeline.\n```json\n{json}\n```\n")
    }

    fn fabricate_feedback(rng: &mut ChaCha8Rng) -> String {
        let mut score = || f64::from(rng.gen_range(55..=95u32)) / 100.0;
        let payload = serde_json::json!({
            "narrative_relevance": score(),
            "temporal_accuracy": score(),
            "chronological_flow": score(),
            "event_detail": score(),
            "repetition": score(),
            "character_identification": score(),
            "confidence_score": score(),
            "critique": "Dates are plausible; tighten event descriptions and name the bench where known.",
        });
        format!("```json\n{payload}\n```\n")
    }

    fn fabricate_judgment(rng: &mut ChaCha8Rng, user_prompt: &str) -> String {
        let mut sentences = Vec::new();
        sentences.push(format!(
            "{} {}.",
            OPENINGS[rng.gen_range(0..OPENINGS.len())],
            SUBJECTS[rng.gen_range(0..SUBJECTS.len())]
        ));
        // Weave the rendered timeline (if present in the prompt) into prose.
        let mut timestamp = None;
        for line in user_prompt.lines() {
            if let Some(ts) = line.strip_prefix("Timestamp: ") {
                timestamp = Some(ts.to_string());
            } else if let Some(event) = line.strip_prefix("Event: ") {
                match timestamp.take() {
                    Some(ts) => sentences.push(format!("In {ts}, {event}.")),
                    None => sentences.push(format!("{event}.")),
                }
            }
        }
        if sentences.len() == 1 {
            for _ in 0..rng.gen_range(3..=5) {
                sentences.push(format!(
                    "In {} {}, {}.",
                    MONTHS[rng.gen_range(0..12)],
                    rng.gen_range(2015..=2023),
                    EVENT_PHRASES[rng.gen_range(0..EVENT_PHRASES.len())]
                ));
            }
        }
        sentences.push(
            "Upon careful consideration of the material on record, the court examined the \
             rival contentions in detail."
                .to_string(),
        );
        sentences.push(CONCLUSIONS[rng.gen_range(0..CONCLUSIONS.len())].to_string());
        sentences.join(" ")
    }

    fn fabricate_summary(rng: &mut ChaCha8Rng, user_prompt: &str) -> String {
        let anchor = user_prompt
            .split_whitespace()
            .find(|w| w.parse::<u32>().map(|y| (1900..3000).contains(&y)) == Ok(true))
            .unwrap_or("recent years");
        // Summaries built from a rendered timeline advertise it, so a
        // marker-preferring judge can recognize them by content.
        let provenance = if user_prompt.contains("Timestamp: ") {
            " The record is chronologically-ordered throughout."
        } else {
            ""
        };
        format!(
            "The dispute, dating to {anchor}, concerned {}. {} The court held that {}{provenance}",
            SUBJECTS[rng.gen_range(0..SUBJECTS.len())],
            "Proceedings moved through interim relief, evidence, and final hearing.",
            CONCLUSIONS[rng.gen_range(0..CONCLUSIONS.len())].to_lowercase()
        )
    }

    fn fabricate_verdict(&self, rng: &mut ChaCha8Rng, prompt: &str) -> String {
        let slot = self
            .prefer_marker
            .as_deref()
            .and_then(|marker| {
                let a = prompt.find("Summary A:")?;
                let b = prompt.find("Summary B:")?;
                let (section_a, section_b) = (&prompt[a..b], &prompt[b..]);
                match (section_a.contains(marker), section_b.contains(marker)) {
                    (true, false) => Some("A"),
                    (false, true) => Some("B"),
                    _ => None,
                }
            })
            .unwrap_or(if rng.gen_bool(0.5) { "A" } else { "B" });
        format!(
            "Comparing both candidates against the checklist, one presents the chronology \
             more cleanly and states the outcome without digression.\nWINNER: {slot}"
        )
    }
}

impl ChatBackend for SimChatBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ModelResponse, GatewayError> {
        let text = if self
            .fail_marker
            .as_deref()
            .is_some_and(|marker| request.user_prompt.contains(marker))
        {
            "I cannot produce the requested output for this document.".to_string()
        } else {
            let mut rng = self.rng_for(request);
            let prompt = &request.user_prompt;
            if prompt.contains("\"confidence_score\"") {
                Self::fabricate_feedback(&mut rng)
            } else if prompt.contains("WINNER:") {
                self.fabricate_verdict(&mut rng, prompt)
            } else if prompt.contains("\"Precedent\"") {
                Self::fabricate_timeline(&mut rng)
            } else if prompt.contains("concise summary") {
                Self::fabricate_summary(&mut rng, prompt)
            } else {
                Self::fabricate_judgment(&mut rng, prompt)
            }
        };
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

/// Deterministic embedder: each token maps to a fixed pseudo-random unit
/// vector derived from (seed, token), stable across calls and processes.
#[derive(Debug, Clone)]
pub struct SimEmbedder {
    seed: u64,
    dim: usize,
}

impl SimEmbedder {
    pub fn new(seed: u64) -> Self {
        Self { seed, dim: 48 }
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim.max(2);
        self
    }
}

impl EmbedBackend for SimEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError> {
        if texts.is_empty() {
            return Err(GatewayError::EmptyInput);
        }
        let rows: Vec<Vec<f64>> = texts
            .iter()
            .map(|text| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a64(text.as_bytes()));
                (0..self.dim).map(|_| rng.gen_range(-1.0f64..1.0)).collect()
            })
            .collect();
        normalize_rows(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(user: &str) -> ChatRequest {
        ChatRequest::new("", user, 0.0, 512, "sim").unwrap()
    }

    #[test]
    fn replies_are_deterministic_per_request() {
        let a = SimChatBackend::new(7);
        let b = SimChatBackend::new(7);
        let req = request("Emit a JSON array with key \"Precedent\" for Criminal Law.");
        assert_eq!(a.complete(&req).unwrap().text, b.complete(&req).unwrap().text);
        let other = request("Emit a JSON array with key \"Precedent\" for Civil Law.");
        assert_ne!(a.complete(&req).unwrap().text, a.complete(&other).unwrap().text);
    }

    #[test]
    fn marker_routing_selects_reply_kind() {
        let sim = SimChatBackend::new(1);
        let feedback = sim
            .complete(&request("score with key \"confidence_score\" please"))
            .unwrap();
        assert!(feedback.text.contains("confidence_score"));
        let verdict = sim
            .complete(&request("end with WINNER: A or WINNER: B"))
            .unwrap();
        assert!(verdict.text.contains("WINNER: "));
        let timeline = sim
            .complete(&request("JSON with \"Precedent\" key"))
            .unwrap();
        assert!(timeline.text.contains("```json"));
        let summary = sim
            .complete(&request("write a concise summary of the matter from 2019"))
            .unwrap();
        assert!(summary.text.contains("2019"));
    }

    #[test]
    fn fail_marker_forces_refusal() {
        let sim = SimChatBackend::new(1).with_fail_marker("POISON");
        let reply = sim
            .complete(&request("JSON with \"Precedent\" key POISON"))
            .unwrap();
        assert!(!reply.text.contains('['));
    }

    #[test]
    fn sim_embedder_is_stable_and_unit_norm() {
        let embedder = SimEmbedder::new(3);
        let texts: Vec<String> = ["alpha", "beta"].iter().map(|s| s.to_string()).collect();
        let first = embedder.embed(&texts).unwrap();
        let second = embedder.embed(&texts[..1].to_vec()).unwrap();
        assert_eq!(first[0], second[0]);
        for row in &first {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
        }
        assert_ne!(first[0], first[1]);
    }
}
