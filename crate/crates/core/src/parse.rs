//! Recovery of structured payloads from noisy model completions.
//!
//! Models wrap the JSON they were asked for in prose, markdown fences,
//! smart quotes, and stray trailing commas. This module locates the first
//! bracket-balanced JSON region and applies a bounded, enumerable repair
//! set — nothing else about the payload text is ever mutated:
//!
//! - `fence-stripped` — markdown code fences removed
//! - `trailing-comma-removed` — `,]` / `,}` commas dropped (outside strings)
//! - `smart-quotes-normalized` — curly quotes mapped to ASCII
//!
//! Timeline parsing is all-or-nothing: one bad element fails the whole
//! parse, because feedback scores apply to the candidate set as a whole and
//! a silently truncated timeline would corrupt the refinement signal.

use serde::{Deserialize, Serialize};

use crate::les::{validate_event, EventField, EventTimeline, ViolationKind};

/// One of the bounded repairs applied while extracting a payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepairTag {
    FenceStripped,
    TrailingCommaRemoved,
    SmartQuotesNormalized,
}

impl RepairTag {
    pub fn as_str(self) -> &'static str {
        match self {
            RepairTag::FenceStripped => "fence-stripped",
            RepairTag::TrailingCommaRemoved => "trailing-comma-removed",
            RepairTag::SmartQuotesNormalized => "smart-quotes-normalized",
        }
    }
}

/// A score that arrived outside [0, 1] and was clamped into range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClampedField {
    pub field: String,
    pub original: f64,
    pub clamped: f64,
}

/// What the parser had to do to recover a payload.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParseDiagnostics {
    pub repairs_applied: Vec<RepairTag>,
    pub clamped_fields: Vec<ClampedField>,
}

impl ParseDiagnostics {
    pub fn is_clean(&self) -> bool {
        self.repairs_applied.is_empty() && self.clamped_fields.is_empty()
    }

    pub fn merge(&mut self, other: ParseDiagnostics) {
        for tag in other.repairs_applied {
            if !self.repairs_applied.contains(&tag) {
                self.repairs_applied.push(tag);
            }
        }
        self.clamped_fields.extend(other.clamped_fields);
    }
}

/// The seven-dimension critique of a candidate timeline.
///
/// All scores live on a 0.00–1.00 scale quantized to two decimals; the
/// confidence score is the loop's convergence signal. The repetition
/// dimension is scored high-is-good (1.00 means free of repetition), a
/// convention fixed by the shipped feedback template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub narrative_relevance: f64,
    pub temporal_accuracy: f64,
    pub chronological_flow: f64,
    pub event_detail: f64,
    pub repetition: f64,
    pub character_identification: f64,
    #[serde(rename = "confidence_score")]
    pub confidence: f64,
    pub critique: String,
}

impl FeedbackReport {
    /// All seven scores in wire-key order.
    pub fn scores(&self) -> [(&'static str, f64); 7] {
        [
            ("narrative_relevance", self.narrative_relevance),
            ("temporal_accuracy", self.temporal_accuracy),
            ("chronological_flow", self.chronological_flow),
            ("event_detail", self.event_detail),
            ("repetition", self.repetition),
            ("character_identification", self.character_identification),
            ("confidence_score", self.confidence),
        ]
    }

    /// Canonical text rendering used when feeding the critique back into a
    /// refinement prompt.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for (key, value) in self.scores() {
            out.push_str(&format!("{key}: {value:.2}\n"));
        }
        out.push_str(&format!("critique: {}", self.critique));
        out
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("no balanced JSON payload found in completion")]
    NoPayloadFound,
    #[error("payload is not valid JSON: {0}")]
    InvalidJson(String),
    #[error("expected a JSON array of event objects, found {found}")]
    NotAnArray { found: &'static str },
    #[error("timeline array is empty")]
    EmptyTimeline,
    #[error("event {index}: schema violation on {field} ({kind:?})")]
    SchemaViolation {
        index: usize,
        field: EventField,
        kind: ViolationKind,
    },
    #[error("feedback payload is not a JSON object")]
    NotAnObject,
    #[error("feedback payload is missing the confidence score")]
    MissingConfidence,
}

fn json_type_name(value: &serde_json::Value) -> &'static str {
    match value {
        serde_json::Value::Null => "null",
        serde_json::Value::Bool(_) => "a boolean",
        serde_json::Value::Number(_) => "a number",
        serde_json::Value::String(_) => "a string",
        serde_json::Value::Array(_) => "an array",
        serde_json::Value::Object(_) => "an object",
    }
}

/// Strip markdown code fences, keeping their content. Returns the stripped
/// text and whether any fence was removed.
fn strip_fences(raw: &str) -> (String, bool) {
    if !raw.contains("```") {
        return (raw.to_string(), false);
    }
    let mut out = String::with_capacity(raw.len());
    let mut stripped = false;
    let mut rest = raw;
    while let Some(open) = rest.find("```") {
        out.push_str(&rest[..open]);
        stripped = true;
        let after_ticks = &rest[open + 3..];
        // Drop an optional language tag on the opening fence line.
        let content_start = after_ticks
            .find('\n')
            .filter(|&nl| {
                after_ticks[..nl]
                    .trim()
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric())
            })
            .map(|nl| nl + 1)
            .unwrap_or(0);
        let body = &after_ticks[content_start..];
        match body.find("```") {
            Some(close) => {
                out.push_str(&body[..close]);
                rest = &body[close + 3..];
            }
            None => {
                out.push_str(body);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    (out, stripped)
}

fn normalize_smart_quotes(text: &str) -> (String, bool) {
    let mut changed = false;
    let out = text
        .chars()
        .map(|c| match c {
            '\u{201c}' | '\u{201d}' => {
                changed = true;
                '"'
            }
            '\u{2018}' | '\u{2019}' => {
                changed = true;
                '\''
            }
            other => other,
        })
        .collect();
    (out, changed)
}

/// Find the first bracket-balanced `[...]` or `{...}` region, honoring JSON
/// string literals and escapes.
fn first_balanced_region(text: &str) -> Option<&str> {
    let mut depth = 0usize;
    let mut start = None;
    let mut in_string = false;
    let mut escaped = false;
    let mut expected_closers: Vec<char> = Vec::new();

    for (i, ch) in text.char_indices() {
        if in_string {
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == '"' {
                in_string = false;
            }
            continue;
        }
        match ch {
            '"' if depth > 0 => in_string = true,
            '[' | '{' => {
                if start.is_none() {
                    start = Some(i);
                }
                expected_closers.push(if ch == '[' { ']' } else { '}' });
                depth += 1;
            }
            ']' | '}' if depth > 0 => {
                if expected_closers.pop() != Some(ch) {
                    // Mismatched closer: abandon this region and keep scanning.
                    depth = 0;
                    start = None;
                    expected_closers.clear();
                    continue;
                }
                depth -= 1;
                if depth == 0 {
                    let s = start.unwrap();
                    return Some(&text[s..=i]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Remove commas that directly precede a closing bracket, outside strings.
fn remove_trailing_commas(text: &str) -> (String, bool) {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut removed = false;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &ch) in chars.iter().enumerate() {
        if in_string {
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == '"' {
                in_string = false;
            }
            out.push(ch);
            continue;
        }
        match ch {
            '"' => {
                in_string = true;
                out.push(ch);
            }
            ',' => {
                let next_significant = chars[i + 1..].iter().find(|c| !c.is_whitespace());
                if matches!(next_significant, Some(']') | Some('}')) {
                    removed = true;
                } else {
                    out.push(ch);
                }
            }
            _ => out.push(ch),
        }
    }
    (out, removed)
}

/// Locate the first bracket-balanced JSON array or object in a completion,
/// applying the bounded repair set and recording what was done.
///
/// The returned text is the repaired payload region; it is not guaranteed to
/// parse (that is the caller's next step), but every repair from the bounded
/// set that helps it parse has been applied.
pub fn extract_json_payload(raw: &str) -> Result<(String, ParseDiagnostics), ParseError> {
    let mut diagnostics = ParseDiagnostics::default();

    let (working, fences) = strip_fences(raw);
    if fences {
        diagnostics.repairs_applied.push(RepairTag::FenceStripped);
    }

    let region = match first_balanced_region(&working) {
        Some(region) => region.to_string(),
        None => {
            // Smart quotes can hide the payload from the string-aware scan;
            // retry once on the normalized text.
            let (normalized, changed) = normalize_smart_quotes(&working);
            if !changed {
                return Err(ParseError::NoPayloadFound);
            }
            let region = first_balanced_region(&normalized)
                .ok_or(ParseError::NoPayloadFound)?
                .to_string();
            diagnostics
                .repairs_applied
                .push(RepairTag::SmartQuotesNormalized);
            region
        }
    };

    let mut payload = region;
    if serde_json::from_str::<serde_json::Value>(&payload).is_ok() {
        return Ok((payload, diagnostics));
    }

    let (without_commas, removed) = remove_trailing_commas(&payload);
    if removed {
        payload = without_commas;
        diagnostics
            .repairs_applied
            .push(RepairTag::TrailingCommaRemoved);
        if serde_json::from_str::<serde_json::Value>(&payload).is_ok() {
            return Ok((payload, diagnostics));
        }
    }

    if !diagnostics
        .repairs_applied
        .contains(&RepairTag::SmartQuotesNormalized)
    {
        let (normalized, changed) = normalize_smart_quotes(&payload);
        if changed {
            payload = normalized;
            diagnostics
                .repairs_applied
                .push(RepairTag::SmartQuotesNormalized);
            let (without_commas, removed) = remove_trailing_commas(&payload);
            if removed {
                payload = without_commas;
                if !diagnostics
                    .repairs_applied
                    .contains(&RepairTag::TrailingCommaRemoved)
                {
                    diagnostics
                        .repairs_applied
                        .push(RepairTag::TrailingCommaRemoved);
                }
            }
        }
    }

    Ok((payload, diagnostics))
}

/// Parse JSON text as a timeline: a non-empty array of schema-valid event
/// objects, order preserved, all-or-nothing.
pub fn parse_timeline(json_text: &str) -> Result<(EventTimeline, ParseDiagnostics), ParseError> {
    let value: serde_json::Value =
        serde_json::from_str(json_text).map_err(|e| ParseError::InvalidJson(e.to_string()))?;
    let elements = value.as_array().ok_or(ParseError::NotAnArray {
        found: json_type_name(&value),
    })?;
    if elements.is_empty() {
        return Err(ParseError::EmptyTimeline);
    }

    let mut events = Vec::with_capacity(elements.len());
    for (index, element) in elements.iter().enumerate() {
        match validate_event(element) {
            Ok(record) => events.push(record),
            Err(violations) => {
                let first = violations[0];
                return Err(ParseError::SchemaViolation {
                    index,
                    field: first.field,
                    kind: first.kind,
                });
            }
        }
    }
    let timeline = EventTimeline::new(events).expect("non-empty by construction");
    Ok((timeline, ParseDiagnostics::default()))
}

/// Extract and parse a timeline from a raw completion in one step, merging
/// diagnostics from both stages.
pub fn timeline_from_completion(
    raw: &str,
) -> Result<(EventTimeline, ParseDiagnostics), ParseError> {
    let (payload, mut diagnostics) = extract_json_payload(raw)?;
    let (timeline, parse_diagnostics) = parse_timeline(&payload)?;
    diagnostics.merge(parse_diagnostics);
    Ok((timeline, diagnostics))
}

/// Append a repair instruction to a prompt on retry attempt `attempt`.
///
/// The attempt number is embedded so each retry presents a distinct prompt;
/// deterministic backends would otherwise replay the same failure verbatim.
pub fn with_retry_note(base: &str, attempt: u32) -> String {
    if attempt == 0 {
        base.to_string()
    } else {
        format!(
            "{base}\n\nYour previous reply could not be used (attempt {attempt}). \
             Reply with exactly the requested output and nothing else."
        )
    }
}

fn quantize(score: f64) -> f64 {
    (score * 100.0).round() / 100.0
}

fn clamp_score(
    field: &str,
    raw: f64,
    diagnostics: &mut ParseDiagnostics,
) -> f64 {
    let clamped = raw.clamp(0.0, 1.0);
    if clamped != raw {
        diagnostics.clamped_fields.push(ClampedField {
            field: field.to_string(),
            original: raw,
            clamped: quantize(clamped),
        });
    }
    quantize(clamped)
}

const FEEDBACK_DIMENSIONS: [&str; 6] = [
    "narrative_relevance",
    "temporal_accuracy",
    "chronological_flow",
    "event_detail",
    "repetition",
    "character_identification",
];

/// Parse a feedback report from a raw completion.
///
/// Performs its own payload extraction. Scores outside [0, 1] are clamped
/// and recorded rather than rejected — aborting a refinement run on a
/// recoverable model quirk would cost far more than the clamp. A missing
/// confidence score is fatal: without it the loop has no convergence
/// signal. Missing advisory dimensions default to 0.00.
pub fn parse_feedback(raw: &str) -> Result<(FeedbackReport, ParseDiagnostics), ParseError> {
    let (payload, mut diagnostics) = extract_json_payload(raw)?;
    let value: serde_json::Value =
        serde_json::from_str(&payload).map_err(|e| ParseError::InvalidJson(e.to_string()))?;
    let object = value.as_object().ok_or(ParseError::NotAnObject)?;

    let confidence_raw = object
        .get("confidence_score")
        .and_then(|v| v.as_f64())
        .ok_or(ParseError::MissingConfidence)?;
    let confidence = clamp_score("confidence_score", confidence_raw, &mut diagnostics);

    let mut dims = [0.0f64; 6];
    for (slot, key) in dims.iter_mut().zip(FEEDBACK_DIMENSIONS) {
        if let Some(raw) = object.get(key).and_then(|v| v.as_f64()) {
            *slot = clamp_score(key, raw, &mut diagnostics);
        }
    }

    let critique = object
        .get("critique")
        .and_then(|v| v.as_str())
        .unwrap_or_default()
        .to_string();

    let report = FeedbackReport {
        narrative_relevance: dims[0],
        temporal_accuracy: dims[1],
        chronological_flow: dims[2],
        event_detail: dims[3],
        repetition: dims[4],
        character_identification: dims[5],
        confidence,
        critique,
    };
    Ok((report, diagnostics))
}
