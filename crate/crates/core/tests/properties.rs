//! Property tests over the schema round-trip, score quantization, and the
//! greedy matcher.

use casetime::eval::greedy_semantic_score;
use casetime::les::{
    canonical_render, parse_canonical, EventRecord, EventTimeline, TimelineRenderOptions,
};
use casetime::parse::parse_feedback;
use proptest::prelude::*;

fn arb_record() -> impl Strategy<Value = EventRecord> {
    (".{0,80}", ".{0,80}", ".{0,40}", ".{0,40}").prop_map(|(ts, ev, judge, precedent)| {
        EventRecord::new(ts, ev, judge, precedent)
    })
}

fn arb_timeline() -> impl Strategy<Value = EventTimeline> {
    prop::collection::vec(arb_record(), 1..6).prop_map(|events| EventTimeline::new(events).unwrap())
}

fn arb_unit_vectors(non_negative: bool) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..6, 2usize..5).prop_flat_map(move |(count, dim)| {
        prop::collection::vec(
            prop::collection::vec(-1.0f64..1.0, dim..=dim),
            count..=count,
        )
        .prop_filter_map("zero vector", move |rows| {
            let normalized: Option<Vec<Vec<f64>>> = rows
                .into_iter()
                .map(|mut row| {
                    if non_negative {
                        for x in row.iter_mut() {
                            *x = x.abs();
                        }
                    }
                    let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if norm < 1e-6 {
                        return None;
                    }
                    Some(row.into_iter().map(|x| x / norm).collect())
                })
                .collect();
            normalized
        })
    })
}

proptest! {
    /// Any rendered timeline reads back field-for-field, whatever the field
    /// text contains.
    #[test]
    fn canonical_render_round_trips(timeline in arb_timeline()) {
        let opts = TimelineRenderOptions::default();
        let text = canonical_render(&timeline, &opts);
        let back = parse_canonical(&text, &opts).unwrap();
        prop_assert_eq!(back, timeline);
    }

    /// Rendering is deterministic.
    #[test]
    fn canonical_render_is_stable(timeline in arb_timeline()) {
        let opts = TimelineRenderOptions::default();
        prop_assert_eq!(
            canonical_render(&timeline, &opts),
            canonical_render(&timeline, &opts)
        );
    }

    /// Whatever numbers arrive, every parsed score is clamped into [0, 1]
    /// and quantized so score × 100 is an integer.
    #[test]
    fn feedback_scores_are_clamped_and_quantized(
        raw in prop::collection::vec(-10.0f64..10.0, 7..=7)
    ) {
        let payload = serde_json::json!({
            "narrative_relevance": raw[0],
            "temporal_accuracy": raw[1],
            "chronological_flow": raw[2],
            "event_detail": raw[3],
            "repetition": raw[4],
            "character_identification": raw[5],
            "confidence_score": raw[6],
            "critique": "c",
        });
        let (report, _) = parse_feedback(&payload.to_string()).unwrap();
        for (_, score) in report.scores() {
            prop_assert!((0.0..=1.0).contains(&score));
            let centi = score * 100.0;
            prop_assert!((centi - centi.round()).abs() < 1e-9);
        }
    }

    /// Swapping candidate and reference exchanges precision and recall.
    #[test]
    fn greedy_score_swap_symmetry(
        candidate in arb_unit_vectors(false),
        reference in arb_unit_vectors(false),
    ) {
        // Pad to a common dimension by regenerating: skip mismatched dims.
        prop_assume!(candidate[0].len() == reference[0].len());
        let forward = greedy_semantic_score(&candidate, &reference).unwrap();
        let backward = greedy_semantic_score(&reference, &candidate).unwrap();
        prop_assert_eq!(forward.precision, backward.recall);
        prop_assert_eq!(forward.recall, backward.precision);
    }

    /// With non-negative embeddings, F1 sits between precision and recall.
    #[test]
    fn f1_between_min_and_max(
        candidate in arb_unit_vectors(true),
        reference in arb_unit_vectors(true),
    ) {
        prop_assume!(candidate[0].len() == reference[0].len());
        let score = greedy_semantic_score(&candidate, &reference).unwrap();
        if score.precision + score.recall > 0.0 {
            let lo = score.precision.min(score.recall);
            let hi = score.precision.max(score.recall);
            prop_assert!(score.f1 >= lo - 1e-12);
            prop_assert!(score.f1 <= hi + 1e-12);
        } else {
            prop_assert_eq!(score.f1, 0.0);
        }
    }
}
