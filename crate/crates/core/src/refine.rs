//! The dual-agent iterative refinement loop.
//!
//! One run works a single judgment: the extraction agent proposes a
//! candidate timeline, the feedback agent critiques it with seven scored
//! dimensions, and the extraction agent refines from exactly the previous
//! candidate and critique — no deeper history. The confidence score is the
//! sole convergence signal. The loop halts on:
//!
//! - **tolerance** — the last `tolerance_window` confidences are identical
//!   after two-decimal quantization;
//! - **patience** — confidence failed to exceed the running best for
//!   `patience_window` consecutive iterations;
//! - **max_iterations** — the iteration cap;
//! - **agent_failure** — extraction stopped producing parseable timelines
//!   mid-run.
//!
//! Precedence when several fire at once is tolerance, then patience, then
//! max_iterations: tolerance is the cheaper certificate of stagnation. The
//! selected timeline is the best-scoring one, not necessarily the last —
//! the loop stops on stagnation, and handing back a post-peak degraded
//! candidate would defeat the point of refining.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::{PromptTemplate, TemplateError};
use crate::gateway::{AgentProfile, ChatBackend, GatewayError};
use crate::les::{canonical_render, EventTimeline, JudgmentDocument, TimelineRenderOptions};
use crate::parse::{
    parse_feedback, timeline_from_completion, with_retry_note, FeedbackReport, ParseDiagnostics,
};

/// Loop bounds. Defaults: up to 10 iterations, both stopping windows 3,
/// 2 parse retries per malformed completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RefinementConfig {
    pub max_iterations: u32,
    pub patience_window: u32,
    pub tolerance_window: u32,
    pub parse_retry_limit: u32,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10,
            patience_window: 3,
            tolerance_window: 3,
            parse_retry_limit: 2,
        }
    }
}

impl RefinementConfig {
    pub fn validate(&self) -> Result<(), RefineryError> {
        if self.max_iterations < 1 {
            return Err(RefineryError::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if self.patience_window < 1 {
            return Err(RefineryError::InvalidConfig(
                "patience_window must be at least 1".into(),
            ));
        }
        if self.tolerance_window < 2 {
            return Err(RefineryError::InvalidConfig(
                "tolerance_window must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Patience,
    Tolerance,
    MaxIterations,
    AgentFailure,
}

/// Verdict of the stopping check after an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Tolerance,
    Patience,
    MaxIterations,
}

impl StopDecision {
    pub fn reason(self) -> Option<StopReason> {
        match self {
            StopDecision::Continue => None,
            StopDecision::Tolerance => Some(StopReason::Tolerance),
            StopDecision::Patience => Some(StopReason::Patience),
            StopDecision::MaxIterations => Some(StopReason::MaxIterations),
        }
    }
}

/// One scored iteration of the loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Iteration number, 0-based; iteration 0 is the initial extraction.
    pub index: u32,
    pub timeline: EventTimeline,
    pub feedback: FeedbackReport,
    pub diagnostics: ParseDiagnostics,
}

/// Running state of one refinement run.
///
/// `no_improve_count` resets to zero exactly when an iteration strictly
/// exceeds the prior best; an iteration dropped for an unscorable critique
/// counts toward no progress but never enters the history.
#[derive(Debug, Clone, Default)]
pub struct RefinementState {
    pub history: Vec<IterationRecord>,
    pub best_score: f64,
    pub best_index: u32,
    pub no_improve_count: u32,
    /// Iterations attempted, including dropped ones.
    pub attempts: u32,
}

impl RefinementState {
    pub fn new() -> Self {
        Self {
            history: Vec::new(),
            best_score: f64::NEG_INFINITY,
            best_index: 0,
            no_improve_count: 0,
            attempts: 0,
        }
    }

    pub fn record_iteration(&mut self, record: IterationRecord) {
        self.attempts += 1;
        if record.feedback.confidence > self.best_score {
            self.best_score = record.feedback.confidence;
            self.best_index = record.index;
            self.no_improve_count = 0;
        } else {
            self.no_improve_count += 1;
        }
        self.history.push(record);
    }

    pub fn record_dropped_iteration(&mut self) {
        self.attempts += 1;
        self.no_improve_count += 1;
    }

    pub fn confidence_trace(&self) -> Vec<f64> {
        self.history.iter().map(|r| r.feedback.confidence).collect()
    }
}

/// Decide whether the loop should stop after the latest iteration.
///
/// Total over any state; with nothing attempted yet the answer is
/// `Continue`.
pub fn should_stop(state: &RefinementState, config: &RefinementConfig) -> StopDecision {
    let window = config.tolerance_window as usize;
    if state.history.len() >= window {
        let tail = &state.history[state.history.len() - window..];
        let first = tail[0].feedback.confidence;
        if tail.iter().all(|r| r.feedback.confidence == first) {
            return StopDecision::Tolerance;
        }
    }
    if state.no_improve_count >= config.patience_window {
        return StopDecision::Patience;
    }
    if state.attempts >= config.max_iterations {
        return StopDecision::MaxIterations;
    }
    StopDecision::Continue
}

/// Pick the record with maximum confidence, earliest index winning ties.
pub fn select_best(
    history: &[IterationRecord],
) -> Result<(usize, &IterationRecord), RefineryError> {
    if history.is_empty() {
        return Err(RefineryError::EmptyHistory);
    }
    let mut best = 0usize;
    for (position, record) in history.iter().enumerate().skip(1) {
        if record.feedback.confidence > history[best].feedback.confidence {
            best = position;
        }
    }
    Ok((best, &history[best]))
}

/// Wall-clock per stage of one attempted iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTiming {
    pub iteration: u32,
    pub extraction_ms: u64,
    pub feedback_ms: u64,
}

/// Outcome of a refinement run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementResult {
    pub selected_timeline: EventTimeline,
    pub selected_feedback: FeedbackReport,
    /// Iteration index of the selected record.
    pub selected_index: u32,
    pub stop_reason: StopReason,
    pub iterations_run: u32,
    pub full_history: Vec<IterationRecord>,
    pub stage_timings: Vec<StageTiming>,
}

impl RefinementResult {
    pub fn confidence_trace(&self) -> Vec<f64> {
        self.full_history
            .iter()
            .map(|r| r.feedback.confidence)
            .collect()
    }

    /// Build the per-document audit record written alongside the timeline.
    pub fn manifest(&self, document_id: &str, config: &RefinementConfig) -> RunManifest {
        RunManifest {
            document_id: document_id.to_string(),
            config: config.clone(),
            confidence_trace: self.confidence_trace(),
            stop_reason: self.stop_reason,
            selected_index: self.selected_index,
            iterations_run: self.iterations_run,
            stage_timings_ms: self.stage_timings.clone(),
        }
    }
}

/// Per-document audit record of a refinement run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub document_id: String,
    pub config: RefinementConfig,
    pub confidence_trace: Vec<f64>,
    pub stop_reason: StopReason,
    pub selected_index: u32,
    pub iterations_run: u32,
    pub stage_timings_ms: Vec<StageTiming>,
}

#[derive(Debug, thiserror::Error)]
pub enum RefineryError {
    #[error("initial extraction never yielded a parseable timeline after {attempts} attempt(s): {last_error}")]
    InitialExtractionFailed { attempts: u32, last_error: String },
    #[error("no iteration could be scored ({attempts} attempted)")]
    NoUsableIterations { attempts: u32 },
    #[error("refinement history is empty")]
    EmptyHistory,
    #[error("invalid refinement config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

/// A chat backend paired with the decoding profile to call it with.
pub struct AgentEndpoint<'a> {
    pub backend: &'a dyn ChatBackend,
    pub profile: AgentProfile,
}

/// The three prompt templates a refinement run needs.
pub struct RefinementTemplates<'a> {
    pub extraction: &'a PromptTemplate,
    pub refinement: &'a PromptTemplate,
    pub feedback: &'a PromptTemplate,
}

impl<'a> From<&'a crate::corpus::TemplateSet> for RefinementTemplates<'a> {
    fn from(set: &'a crate::corpus::TemplateSet) -> Self {
        Self {
            extraction: &set.extraction,
            refinement: &set.refinement,
            feedback: &set.feedback,
        }
    }
}

enum StageOutcome<T> {
    Parsed(T),
    Unparseable { last_error: String },
}

fn run_stage<T>(
    endpoint: &AgentEndpoint<'_>,
    base_prompt: &str,
    retry_limit: u32,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<StageOutcome<T>, RefineryError> {
    let mut last_error = String::new();
    for attempt in 0..=retry_limit {
        let prompt = with_retry_note(base_prompt, attempt);
        let response = endpoint.backend.complete(&endpoint.profile.request(prompt)?)?;
        match parse(&response.text) {
            Ok(value) => return Ok(StageOutcome::Parsed(value)),
            Err(message) => last_error = message,
        }
    }
    Ok(StageOutcome::Unparseable { last_error })
}

/// Run the full extract → critique → refine loop over one judgment.
///
/// Iteration 0 prompts with the judgment alone; iteration `i ≥ 1` prompts
/// with the judgment plus exactly the previous candidate and critique. A
/// malformed completion is retried up to `parse_retry_limit` times with a
/// repair note; a permanently unscorable critique drops its iteration from
/// history and counts as no progress. Fully deterministic given scripted
/// backends.
pub fn run_refinement(
    judgment: &JudgmentDocument,
    extraction: &AgentEndpoint<'_>,
    feedback: &AgentEndpoint<'_>,
    templates: &RefinementTemplates<'_>,
    config: &RefinementConfig,
) -> Result<RefinementResult, RefineryError> {
    config.validate()?;
    let render_opts = TimelineRenderOptions::default();
    let mut state = RefinementState::new();
    let mut stage_timings = Vec::new();
    // Last scored (candidate, critique) pair — all a refinement prompt sees.
    let mut previous: Option<(String, String)> = None;

    let stop_reason = loop {
        let iteration = state.attempts;

        let extraction_prompt = match &previous {
            None => templates
                .extraction
                .render(&[("judgment", judgment.text.as_str())])?,
            Some((timeline_text, feedback_text)) => templates.refinement.render(&[
                ("judgment", judgment.text.as_str()),
                ("timeline", timeline_text.as_str()),
                ("feedback", feedback_text.as_str()),
            ])?,
        };

        let extraction_start = Instant::now();
        let extraction_outcome = run_stage(
            extraction,
            &extraction_prompt,
            config.parse_retry_limit,
            |text| timeline_from_completion(text).map_err(|e| e.to_string()),
        )?;
        let extraction_ms = extraction_start.elapsed().as_millis() as u64;

        let (timeline, timeline_diagnostics) = match extraction_outcome {
            StageOutcome::Parsed(parsed) => parsed,
            StageOutcome::Unparseable { last_error } => {
                if iteration == 0 {
                    return Err(RefineryError::InitialExtractionFailed {
                        attempts: config.parse_retry_limit + 1,
                        last_error,
                    });
                }
                stage_timings.push(StageTiming {
                    iteration,
                    extraction_ms,
                    feedback_ms: 0,
                });
                break StopReason::AgentFailure;
            }
        };

        let timeline_text = canonical_render(&timeline, &render_opts);
        let feedback_prompt = templates.feedback.render(&[
            ("judgment", judgment.text.as_str()),
            ("timeline", timeline_text.as_str()),
        ])?;

        let feedback_start = Instant::now();
        let feedback_outcome = run_stage(
            feedback,
            &feedback_prompt,
            config.parse_retry_limit,
            |text| parse_feedback(text).map_err(|e| e.to_string()),
        )?;
        stage_timings.push(StageTiming {
            iteration,
            extraction_ms,
            feedback_ms: feedback_start.elapsed().as_millis() as u64,
        });

        match feedback_outcome {
            StageOutcome::Parsed((report, feedback_diagnostics)) => {
                let mut diagnostics = timeline_diagnostics;
                diagnostics.merge(feedback_diagnostics);
                previous = Some((timeline_text, report.render_text()));
                state.record_iteration(IterationRecord {
                    index: iteration,
                    timeline,
                    feedback: report,
                    diagnostics,
                });
            }
            StageOutcome::Unparseable { .. } => {
                // Unscorable critique: no convergence signal from this pass.
                state.record_dropped_iteration();
            }
        }

        match should_stop(&state, config).reason() {
            None => continue,
            Some(reason) => break reason,
        }
    };

    if state.history.is_empty() {
        return Err(RefineryError::NoUsableIterations {
            attempts: state.attempts,
        });
    }
    let (_, best) = select_best(&state.history)?;
    Ok(RefinementResult {
        selected_timeline: best.timeline.clone(),
        selected_feedback: best.feedback.clone(),
        selected_index: best.index,
        stop_reason,
        iterations_run: state.attempts,
        full_history: state.history,
        stage_timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(index: u32, confidence: f64) -> IterationRecord {
        IterationRecord {
            index,
            timeline: EventTimeline::new(vec![crate::les::EventRecord::new(
                "January 2020",
                "x",
                "N/A",
                "N/A",
            )])
            .unwrap(),
            feedback: FeedbackReport {
                narrative_relevance: confidence,
                temporal_accuracy: confidence,
                chronological_flow: confidence,
                event_detail: confidence,
                repetition: confidence,
                character_identification: confidence,
                confidence,
                critique: String::new(),
            },
            diagnostics: ParseDiagnostics::default(),
        }
    }

    fn state_from(confidences: &[f64]) -> RefinementState {
        let mut state = RefinementState::new();
        for (i, &c) in confidences.iter().enumerate() {
            state.record_iteration(record(i as u32, c));
        }
        state
    }

    #[test]
    fn tolerance_fires_on_equal_window() {
        let state = state_from(&[0.75, 0.75, 0.75]);
        assert_eq!(
            should_stop(&state, &RefinementConfig::default()),
            StopDecision::Tolerance
        );
    }

    #[test]
    fn patience_fires_after_window_without_improvement() {
        let state = state_from(&[0.90, 0.85, 0.88, 0.89]);
        assert_eq!(state.no_improve_count, 3);
        assert_eq!(
            should_stop(&state, &RefinementConfig::default()),
            StopDecision::Patience
        );
    }

    #[test]
    fn short_history_continues() {
        let state = state_from(&[0.60, 0.70]);
        assert_eq!(
            should_stop(&state, &RefinementConfig::default()),
            StopDecision::Continue
        );
    }

    #[test]
    fn tolerance_outranks_patience_and_cap() {
        // Patience (counter 3) and tolerance (equal tail) fire together.
        let state = state_from(&[0.90, 0.80, 0.80, 0.80]);
        assert_eq!(state.no_improve_count, 3);
        assert_eq!(
            should_stop(&state, &RefinementConfig::default()),
            StopDecision::Tolerance
        );
        // All three fire at the cap.
        let config = RefinementConfig {
            max_iterations: 4,
            ..RefinementConfig::default()
        };
        assert_eq!(should_stop(&state, &config), StopDecision::Tolerance);
    }

    #[test]
    fn counter_resets_only_on_strict_improvement() {
        let mut state = RefinementState::new();
        state.record_iteration(record(0, 0.70));
        assert_eq!(state.no_improve_count, 0);
        state.record_iteration(record(1, 0.70));
        assert_eq!(state.no_improve_count, 1);
        state.record_iteration(record(2, 0.71));
        assert_eq!(state.no_improve_count, 0);
        assert_eq!(state.best_index, 2);
        state.record_dropped_iteration();
        assert_eq!(state.no_improve_count, 1);
        assert_eq!(state.attempts, 4);
        assert_eq!(state.history.len(), 3);
    }

    #[test]
    fn select_best_prefers_earliest_max() {
        let history = vec![record(0, 0.5), record(1, 0.9), record(2, 0.9)];
        let (position, best) = select_best(&history).unwrap();
        assert_eq!(position, 1);
        assert_eq!(best.index, 1);

        let single = vec![record(0, 0.7)];
        assert_eq!(select_best(&single).unwrap().0, 0);

        let decreasing = vec![record(0, 0.3), record(1, 0.2), record(2, 0.1)];
        assert_eq!(select_best(&decreasing).unwrap().0, 0);

        assert!(matches!(
            select_best(&[]),
            Err(RefineryError::EmptyHistory)
        ));
    }

    #[test]
    fn config_bounds_are_enforced() {
        assert!(RefinementConfig::default().validate().is_ok());
        let bad = RefinementConfig {
            tolerance_window: 1,
            ..RefinementConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = RefinementConfig {
            max_iterations: 0,
            ..RefinementConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
