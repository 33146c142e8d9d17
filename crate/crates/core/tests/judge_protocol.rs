//! The order-swapped pairwise judge protocol and summary generation.

mod common;

use casetime::eval::{
    pairwise_judge, summarize, tally_preferences, EvalError, JudgeOptions, SummaryInput,
    SummaryPair, SummaryVariant, WinnerClass,
};
use casetime::gateway::ScriptedBackend;
use casetime::les::{
    canonical_render, CaseCategory, EventRecord, EventTimeline, JudgmentDocument,
    TimelineRenderOptions,
};
use casetime::refine::AgentEndpoint;
use common::{profile, test_templates};

fn judgment() -> JudgmentDocument {
    JudgmentDocument {
        id: "doc-0001".to_string(),
        text: "In March 2021 the tribunal allowed the petition. The appeal failed.".to_string(),
        category: CaseCategory::ConsumerProtectionLaw,
    }
}

fn pair() -> SummaryPair {
    SummaryPair {
        judgment_id: "doc-0001".to_string(),
        unstructured_summary: "Summary written from the raw judgment.".to_string(),
        structured_summary: "Summary written from the timeline.".to_string(),
        summarizer_tag: "sim".to_string(),
    }
}

fn judge_with(responses: Vec<&str>, options: &JudgeOptions) -> (Result<casetime::eval::JudgeVerdict, EvalError>, ScriptedBackend) {
    let backend = ScriptedBackend::new(responses);
    let templates = test_templates();
    let verdict = pairwise_judge(
        &judgment(),
        &pair(),
        &AgentEndpoint {
            backend: &backend,
            profile: profile(),
        },
        &templates.judge,
        options,
    );
    (verdict, backend)
}

#[test]
fn slot_loyal_judge_is_exposed_as_inconsistent() {
    let (verdict, backend) = judge_with(
        vec!["I pick the first.\nWINNER: A", "Again the first.\nWINNER: A"],
        &JudgeOptions::default(),
    );
    let verdict = verdict.unwrap();
    assert_eq!(verdict.winner, WinnerClass::Inconsistent);
    assert!(!verdict.orderings_agreed);
    assert_eq!(backend.calls_made(), 2);
}

#[test]
fn content_consistent_judge_yields_a_winner() {
    // Ordering one: B is the structured summary. Ordering two: A is.
    let (verdict, backend) = judge_with(
        vec!["Cleaner chronology.\nWINNER: B", "Cleaner chronology.\nWINNER: A"],
        &JudgeOptions::default(),
    );
    let verdict = verdict.unwrap();
    assert_eq!(verdict.winner, WinnerClass::Structured);
    assert!(verdict.orderings_agreed);
    assert_eq!(verdict.rationale, "Cleaner chronology.\nWINNER: B");

    // Both orderings are rendered with the slots swapped.
    let log = backend.call_log();
    let first = &log[0].user_prompt;
    let second = &log[1].user_prompt;
    assert!(first.find("raw judgment").unwrap() < first.find("the timeline").unwrap());
    assert!(second.find("the timeline").unwrap() < second.find("raw judgment").unwrap());
}

#[test]
fn unstructured_preference_maps_back_too() {
    let (verdict, _) = judge_with(
        vec!["WINNER: A", "WINNER: B"],
        &JudgeOptions::default(),
    );
    assert_eq!(verdict.unwrap().winner, WinnerClass::Unstructured);
}

#[test]
fn prose_without_choice_token_errors_after_retries() {
    let (verdict, backend) = judge_with(
        vec!["no decision", "still pondering", "who can say"],
        &JudgeOptions::default(),
    );
    match verdict {
        Err(EvalError::UnparseableVerdict { attempts: 3 }) => {}
        other => panic!("expected UnparseableVerdict, got {other:?}"),
    }
    assert_eq!(backend.calls_made(), 3);
}

#[test]
fn single_order_mode_skips_the_swap() {
    let options = JudgeOptions {
        swap_orders: false,
        ..JudgeOptions::default()
    };
    let (verdict, backend) = judge_with(vec!["WINNER: B"], &options);
    let verdict = verdict.unwrap();
    assert_eq!(verdict.winner, WinnerClass::Structured);
    assert!(verdict.orderings_agreed);
    assert_eq!(backend.calls_made(), 1);
}

#[test]
fn summarize_sends_the_right_representation() {
    let templates = test_templates();
    let timeline = EventTimeline::new(vec![EventRecord::new(
        "March 2021",
        "petition allowed",
        "N/A",
        "N/A",
    )])
    .unwrap();

    let backend = ScriptedBackend::new(["summary one", "summary two"]);
    let endpoint = AgentEndpoint {
        backend: &backend,
        profile: profile(),
    };

    let unstructured = summarize(
        SummaryInput::Unstructured(&judgment()),
        &endpoint,
        &templates.summary,
    )
    .unwrap();
    assert_eq!(unstructured.text, "summary one");
    assert_eq!(unstructured.variant, SummaryVariant::Unstructured);

    let structured = summarize(
        SummaryInput::Structured(&timeline),
        &endpoint,
        &templates.summary,
    )
    .unwrap();
    assert_eq!(structured.variant, SummaryVariant::Structured);

    let log = backend.call_log();
    assert!(log[0].user_prompt.contains(&judgment().text));
    let rendered = canonical_render(&timeline, &TimelineRenderOptions::default());
    assert!(log[1].user_prompt.contains(&rendered));
    assert!(!log[1].user_prompt.contains(&judgment().text));
}

#[test]
fn empty_judgment_text_is_rejected() {
    let templates = test_templates();
    let backend = ScriptedBackend::new(["unused"]);
    let endpoint = AgentEndpoint {
        backend: &backend,
        profile: profile(),
    };
    let empty = JudgmentDocument {
        id: "doc-0002".to_string(),
        text: "   ".to_string(),
        category: CaseCategory::CivilLaw,
    };
    let err = summarize(SummaryInput::Unstructured(&empty), &endpoint, &templates.summary)
        .unwrap_err();
    assert!(matches!(err, EvalError::EmptyJudgment));
    assert_eq!(backend.calls_made(), 0);
}

#[test]
fn tally_accounts_for_every_verdict() {
    let make = |winner| casetime::eval::JudgeVerdict {
        judgment_id: "d".to_string(),
        winner,
        rationale: String::new(),
        orderings_agreed: true,
    };
    let verdicts: Vec<_> = std::iter::repeat_with(|| make(WinnerClass::Structured))
        .take(150)
        .chain(std::iter::repeat_with(|| make(WinnerClass::Unstructured)).take(50))
        .collect();
    let tally = tally_preferences(&verdicts);
    assert_eq!(tally.structured_wins, 150);
    assert_eq!(tally.unstructured_wins, 50);
    assert_eq!(tally.inconsistent, 0);
    assert_eq!(tally.total(), 200);
    assert!((tally.structured_ratio() - 0.75).abs() < 1e-12);
}
