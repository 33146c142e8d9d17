#![allow(dead_code)]

use casetime::corpus::PromptTemplate;
use casetime::gateway::AgentProfile;

/// A distinct, schema-valid timeline completion for iteration `tag`.
pub fn timeline_completion(tag: usize, events: usize) -> String {
    let records: Vec<serde_json::Value> = (0..events.max(1))
        .map(|i| {
            serde_json::json!({
                "Timestamp": format!("{} 20{}", MONTHS[i % MONTHS.len()], 15 + (tag % 10)),
                "Event": format!("step {i} of candidate {tag}"),
                "Judge": "N/A",
                "Precedent": if i % 2 == 0 { "A v. B 5 SCC 739" } else { "N/A" },
            })
        })
        .collect();
    format!(
        "Here is the timeline.\n```json\n{}\n```",
        serde_json::to_string(&records).unwrap()
    )
}

const MONTHS: [&str; 6] = ["January", "March", "May", "July", "September", "November"];

/// A feedback completion carrying the given (unquantized) confidence.
pub fn feedback_completion(confidence: f64) -> String {
    format!(
        r#"{{"narrative_relevance": 0.7, "temporal_accuracy": 0.7, "chronological_flow": 0.7,
            "event_detail": 0.7, "repetition": 0.7, "character_identification": 0.7,
            "confidence_score": {confidence}, "critique": "tighten the middle events"}}"#
    )
}

pub struct TestTemplates {
    pub extraction: PromptTemplate,
    pub refinement: PromptTemplate,
    pub feedback: PromptTemplate,
    pub summary: PromptTemplate,
    pub judge: PromptTemplate,
    pub timeline_gen: PromptTemplate,
    pub judgment_gen: PromptTemplate,
}

pub fn test_templates() -> TestTemplates {
    TestTemplates {
        extraction: PromptTemplate::load(
            "extraction",
            "EXTRACT from:\n{{judgment}}",
            &["judgment"],
        )
        .unwrap(),
        refinement: PromptTemplate::load(
            "refinement",
            "REFINE for:\n{{judgment}}\nPREVIOUS:\n{{timeline}}\nCRITIQUE:\n{{feedback}}",
            &["judgment", "timeline", "feedback"],
        )
        .unwrap(),
        feedback: PromptTemplate::load(
            "feedback",
            "SCORE against:\n{{judgment}}\nCANDIDATE:\n{{timeline}}",
            &["judgment", "timeline"],
        )
        .unwrap(),
        summary: PromptTemplate::load("summary", "SUMMARIZE:\n{{judgment}}", &["judgment"])
            .unwrap(),
        judge: PromptTemplate::load(
            "judge",
            "JUDGE {{judgment}}\nSummary A:\n{{summary_a}}\nSummary B:\n{{summary_b}}\nEnd with WINNER: A or WINNER: B",
            &["judgment", "summary_a", "summary_b"],
        )
        .unwrap(),
        timeline_gen: PromptTemplate::load(
            "timeline_gen",
            "GENERATE timeline for {{category}} as JSON with \"Precedent\" keys",
            &["category"],
        )
        .unwrap(),
        judgment_gen: PromptTemplate::load(
            "judgment_gen",
            "WRITE judgment narrating:\n{{timeline}}",
            &["timeline"],
        )
        .unwrap(),
    }
}

pub fn profile() -> AgentProfile {
    AgentProfile::new("test-model", 0.0, 1024)
}
