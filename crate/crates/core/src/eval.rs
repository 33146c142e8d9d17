//! Semantic scoring of timelines and the pairwise summary-judge protocol.
//!
//! Scoring is the greedy embedding-matching form: precision is the mean,
//! over candidate tokens, of the best cosine similarity to any reference
//! token; recall is the mirror image; F1 their harmonic mean. No IDF
//! weighting, no baseline rescaling — the embedder is a pluggable endpoint,
//! so heavier variants can be layered behind it without touching the
//! matcher. Timelines are compared as whitespace tokens of their canonical
//! rendering, which keeps the scorer embedder-agnostic.
//!
//! Judging is pairwise with an order swap: the judge sees the two summaries
//! as "Summary A"/"Summary B", then again with the slots exchanged. Only
//! when both orderings prefer the same underlying summary is a winner
//! reported; a judge that merely prefers a slot position yields
//! `inconsistent` rather than a coin-flipped result. Single-order judging
//! (no swap, no inconsistent class) remains available via
//! [`JudgeOptions::swap_orders`].

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{PromptTemplate, TemplateError};
use crate::gateway::{EmbedBackend, GatewayError};
use crate::les::{canonical_render, EventTimeline, JudgmentDocument, TimelineRenderOptions};
use crate::parse::with_retry_note;
use crate::refine::AgentEndpoint;

/// Precision/recall/F1 triple from greedy embedding matching.
///
/// Values live in the cosine range `[-1, 1]`; with non-negative embedders
/// they stay in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl SemanticScore {
    pub fn from_precision_recall(precision: f64, recall: f64) -> Self {
        let sum = precision + recall;
        let f1 = if sum == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / sum
        };
        Self {
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{side} token sequence is empty")]
    EmptySequence { side: &'static str },
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("judgment text is empty")]
    EmptyJudgment,
    #[error("judge never emitted a recognizable choice after {attempts} attempt(s)")]
    UnparseableVerdict { attempts: u32 },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Greedy semantic score over two sequences of unit-norm token vectors.
///
/// Precision averages, per candidate token, the maximum similarity to any
/// reference token; recall does the reverse; F1 is `2PR/(P+R)` (zero when
/// `P + R` is zero).
pub fn greedy_semantic_score(
    candidate: &[Vec<f64>],
    reference: &[Vec<f64>],
) -> Result<SemanticScore, EvalError> {
    if candidate.is_empty() {
        return Err(EvalError::EmptySequence { side: "candidate" });
    }
    if reference.is_empty() {
        return Err(EvalError::EmptySequence { side: "reference" });
    }
    let expected = candidate[0].len();
    for row in candidate.iter().chain(reference) {
        if row.len() != expected {
            return Err(EvalError::DimensionMismatch {
                expected,
                got: row.len(),
            });
        }
    }

    let best_against = |token: &Vec<f64>, pool: &[Vec<f64>]| {
        pool.iter()
            .map(|other| dot(token, other))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let precision = candidate
        .iter()
        .map(|t| best_against(t, reference))
        .sum::<f64>()
        / candidate.len() as f64;
    let recall = reference
        .iter()
        .map(|t| best_against(t, candidate))
        .sum::<f64>()
        / reference.len() as f64;
    Ok(SemanticScore::from_precision_recall(precision, recall))
}

fn timeline_tokens(timeline: &EventTimeline) -> Vec<String> {
    canonical_render(timeline, &TimelineRenderOptions::default())
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

/// Score a predicted timeline against the gold one.
///
/// Both are canonically rendered, whitespace-tokenized, and embedded in a
/// single batch (so embedders with per-call vocabularies see both sides
/// together), then matched greedily.
pub fn score_timeline(
    predicted: &EventTimeline,
    gold: &EventTimeline,
    embedder: &dyn EmbedBackend,
) -> Result<SemanticScore, EvalError> {
    let candidate_tokens = timeline_tokens(predicted);
    let reference_tokens = timeline_tokens(gold);

    let mut batch = Vec::with_capacity(candidate_tokens.len() + reference_tokens.len());
    batch.extend(candidate_tokens.iter().cloned());
    batch.extend(reference_tokens.iter().cloned());
    let rows = embedder.embed(&batch)?;
    let (candidate_rows, reference_rows) = rows.split_at(candidate_tokens.len());

    greedy_semantic_score(candidate_rows, reference_rows)
}

/// Which input representation produced a summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryVariant {
    Unstructured,
    Structured,
}

/// Input to the summarizer: the raw judgment, or its gold timeline rendered
/// canonically.
pub enum SummaryInput<'a> {
    Unstructured(&'a JudgmentDocument),
    Structured(&'a EventTimeline),
}

/// A generated summary, tagged with the variant that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub text: String,
    pub variant: SummaryVariant,
}

/// The two candidate summaries for one judgment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryPair {
    pub judgment_id: String,
    pub unstructured_summary: String,
    pub structured_summary: String,
    pub summarizer_tag: String,
}

/// Generate one summary. Both variants go through the same backend and the
/// same template so the input representation is the only difference.
pub fn summarize(
    input: SummaryInput<'_>,
    summarizer: &AgentEndpoint<'_>,
    template: &PromptTemplate,
) -> Result<Summary, EvalError> {
    let (source, variant) = match input {
        SummaryInput::Unstructured(judgment) => {
            if judgment.text.trim().is_empty() {
                return Err(EvalError::EmptyJudgment);
            }
            (judgment.text.clone(), SummaryVariant::Unstructured)
        }
        SummaryInput::Structured(timeline) => (
            canonical_render(timeline, &TimelineRenderOptions::default()),
            SummaryVariant::Structured,
        ),
    };
    let prompt = template.render(&[("judgment", source.as_str())])?;
    let response = summarizer.backend.complete(&summarizer.profile.request(prompt)?)?;
    Ok(Summary {
        text: response.text,
        variant,
    })
}

/// The judge's pick for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WinnerClass {
    Unstructured,
    Structured,
    /// The swapped orderings disagreed: the judge was following slot
    /// position, not content.
    Inconsistent,
}

/// A judged pair, mapped back from presentation slots to variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub judgment_id: String,
    pub winner: WinnerClass,
    pub rationale: String,
    pub orderings_agreed: bool,
}

#[derive(Debug, Clone)]
pub struct JudgeOptions {
    pub retry_limit: u32,
    /// Judge twice with slots exchanged (the default). Disable to recover
    /// single-order judging with no inconsistent class.
    pub swap_orders: bool,
}

impl Default for JudgeOptions {
    fn default() -> Self {
        Self {
            retry_limit: 2,
            swap_orders: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    A,
    B,
}

fn winner_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| Regex::new(r"(?i)\bwinner\s*[:\-]?\s*\*{0,2}\s*([ab])\b").unwrap())
}

/// The last recognizable `WINNER: A` / `WINNER: B` token, case-insensitive.
fn parse_winner(completion: &str) -> Option<Slot> {
    winner_pattern()
        .captures_iter(completion)
        .last()
        .map(|caps| match caps[1].to_ascii_lowercase().as_str() {
            "a" => Slot::A,
            _ => Slot::B,
        })
}

fn judge_once(
    judge: &AgentEndpoint<'_>,
    template: &PromptTemplate,
    judgment: &JudgmentDocument,
    summary_a: &str,
    summary_b: &str,
    retry_limit: u32,
) -> Result<(Slot, String), EvalError> {
    let base_prompt = template.render(&[
        ("judgment", judgment.text.as_str()),
        ("summary_a", summary_a),
        ("summary_b", summary_b),
    ])?;
    for attempt in 0..=retry_limit {
        let prompt = with_retry_note(&base_prompt, attempt);
        let response = judge.backend.complete(&judge.profile.request(prompt)?)?;
        if let Some(slot) = parse_winner(&response.text) {
            return Ok((slot, response.text));
        }
    }
    Err(EvalError::UnparseableVerdict {
        attempts: retry_limit + 1,
    })
}

/// Judge one summary pair against the checklist, swapping presentation
/// orders to expose position bias.
///
/// Ordering one presents the unstructured summary as Summary A; ordering
/// two swaps the slots. A winner is reported only when both orderings
/// prefer the same underlying summary.
pub fn pairwise_judge(
    judgment: &JudgmentDocument,
    pair: &SummaryPair,
    judge: &AgentEndpoint<'_>,
    checklist_template: &PromptTemplate,
    options: &JudgeOptions,
) -> Result<JudgeVerdict, EvalError> {
    let (first_slot, first_rationale) = judge_once(
        judge,
        checklist_template,
        judgment,
        &pair.unstructured_summary,
        &pair.structured_summary,
        options.retry_limit,
    )?;
    let first_pick = match first_slot {
        Slot::A => WinnerClass::Unstructured,
        Slot::B => WinnerClass::Structured,
    };

    if !options.swap_orders {
        return Ok(JudgeVerdict {
            judgment_id: pair.judgment_id.clone(),
            winner: first_pick,
            rationale: first_rationale,
            orderings_agreed: true,
        });
    }

    let (second_slot, second_rationale) = judge_once(
        judge,
        checklist_template,
        judgment,
        &pair.structured_summary,
        &pair.unstructured_summary,
        options.retry_limit,
    )?;
    let second_pick = match second_slot {
        Slot::A => WinnerClass::Structured,
        Slot::B => WinnerClass::Unstructured,
    };

    let agreed = first_pick == second_pick;
    Ok(JudgeVerdict {
        judgment_id: pair.judgment_id.clone(),
        winner: if agreed {
            first_pick
        } else {
            WinnerClass::Inconsistent
        },
        rationale: if agreed {
            first_rationale
        } else {
            format!("{first_rationale}\n---\n{second_rationale}")
        },
        orderings_agreed: agreed,
    })
}

/// Per-variant win counts over a batch of verdicts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceTally {
    pub structured_wins: usize,
    pub unstructured_wins: usize,
    pub inconsistent: usize,
}

impl PreferenceTally {
    pub fn total(&self) -> usize {
        self.structured_wins + self.unstructured_wins + self.inconsistent
    }

    /// Fraction of all verdicts preferring the structured summary.
    pub fn structured_ratio(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.structured_wins as f64 / total as f64
        }
    }
}

/// Fold verdicts into per-winner counts.
pub fn tally_preferences(verdicts: &[JudgeVerdict]) -> PreferenceTally {
    let mut tally = PreferenceTally::default();
    for verdict in verdicts {
        match verdict.winner {
            WinnerClass::Structured => tally.structured_wins += 1,
            WinnerClass::Unstructured => tally.unstructured_wins += 1,
            WinnerClass::Inconsistent => tally.inconsistent += 1,
        }
    }
    tally
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_hot(index: usize, dim: usize) -> Vec<f64> {
        let mut row = vec![0.0; dim];
        row[index] = 1.0;
        row
    }

    #[test]
    fn self_match_is_perfect() {
        let tokens = vec![one_hot(0, 3), one_hot(1, 3), one_hot(2, 3)];
        let score = greedy_semantic_score(&tokens, &tokens).unwrap();
        assert!((score.precision - 1.0).abs() < 1e-12);
        assert!((score.recall - 1.0).abs() < 1e-12);
        assert!((score.f1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_overlap_scores_half() {
        // candidate {a, b}, reference {b, c} under one-hot embedding.
        let candidate = vec![one_hot(0, 3), one_hot(1, 3)];
        let reference = vec![one_hot(1, 3), one_hot(2, 3)];
        let score = greedy_semantic_score(&candidate, &reference).unwrap();
        assert_eq!(score.precision, 0.5);
        assert_eq!(score.recall, 0.5);
        assert_eq!(score.f1, 0.5);
    }

    #[test]
    fn disjoint_tokens_score_zero() {
        let candidate = vec![one_hot(0, 4), one_hot(1, 4)];
        let reference = vec![one_hot(2, 4), one_hot(3, 4)];
        let score = greedy_semantic_score(&candidate, &reference).unwrap();
        assert_eq!(score.precision, 0.0);
        assert_eq!(score.recall, 0.0);
        assert_eq!(score.f1, 0.0);
    }

    #[test]
    fn swap_exchanges_precision_and_recall() {
        let a = vec![one_hot(0, 3), one_hot(1, 3), one_hot(1, 3)];
        let b = vec![one_hot(1, 3), one_hot(2, 3)];
        let forward = greedy_semantic_score(&a, &b).unwrap();
        let backward = greedy_semantic_score(&b, &a).unwrap();
        assert_eq!(forward.precision, backward.recall);
        assert_eq!(forward.recall, backward.precision);
    }

    #[test]
    fn empty_and_ragged_inputs_are_errors() {
        let tokens = vec![one_hot(0, 2)];
        assert!(matches!(
            greedy_semantic_score(&[], &tokens),
            Err(EvalError::EmptySequence { side: "candidate" })
        ));
        assert!(matches!(
            greedy_semantic_score(&tokens, &[]),
            Err(EvalError::EmptySequence { side: "reference" })
        ));
        let ragged = vec![vec![1.0, 0.0, 0.0]];
        assert!(matches!(
            greedy_semantic_score(&tokens, &ragged),
            Err(EvalError::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn winner_parsing_is_tolerant() {
        assert_eq!(parse_winner("WINNER: A"), Some(Slot::A));
        assert_eq!(parse_winner("...\nwinner: b\n"), Some(Slot::B));
        assert_eq!(parse_winner("Winner - **B**... no wait.\nWINNER: A"), Some(Slot::A));
        assert_eq!(parse_winner("Summary A is better."), None);
        assert_eq!(parse_winner("the winner: ambiguous"), None);
    }

    #[test]
    fn tally_counts_each_class() {
        let verdict = |winner| JudgeVerdict {
            judgment_id: "d".into(),
            winner,
            rationale: String::new(),
            orderings_agreed: winner != WinnerClass::Inconsistent,
        };
        let verdicts = vec![
            verdict(WinnerClass::Structured),
            verdict(WinnerClass::Structured),
            verdict(WinnerClass::Unstructured),
            verdict(WinnerClass::Inconsistent),
        ];
        let tally = tally_preferences(&verdicts);
        assert_eq!(tally.structured_wins, 2);
        assert_eq!(tally.unstructured_wins, 1);
        assert_eq!(tally.inconsistent, 1);
        assert_eq!(tally.total(), verdicts.len());
        assert_eq!(tally_preferences(&[]), PreferenceTally::default());
    }
}
