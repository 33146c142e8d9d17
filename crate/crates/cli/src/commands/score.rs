//! `score`: semantic P/R/F1 of each extracted timeline against its gold
//! timeline, one JSONL line per document plus a trailing aggregate.

use std::io::Write;

use anyhow::{bail, Context, Result};
use casetime::corpus::Corpus;
use casetime::eval::{score_timeline, SemanticScore};
use casetime::les::EventTimeline;

use crate::config::LoadedConfig;

/// One line of the scores file.
#[derive(serde::Serialize)]
struct ScoreLine<'a> {
    id: &'a str,
    precision: f64,
    recall: f64,
    f1: f64,
}

pub fn cmd_score(cfg: &LoadedConfig) -> Result<usize> {
    let corpus = Corpus::read_jsonl_file(&cfg.run.paths.corpus_file)
        .map_err(|e| anyhow::anyhow!(e.to_string()))?;
    if corpus.is_empty() {
        bail!("corpus {} is empty", cfg.run.paths.corpus_file.display());
    }
    let embedder = cfg.role("embedder")?.embed_backend(cfg.run.seed)?;
    let timelines_dir = cfg.run.paths.output_dir.join("timelines");

    enum DocScore {
        Scored(SemanticScore),
        Missing,
        Failed(String),
    }

    let results: Vec<DocScore> =
        crate::batch::run_parallel(corpus.len(), cfg.run.concurrency, |index| {
            let record = &corpus.records[index];
            let path = timelines_dir.join(format!("{}.json", record.id));
            if !path.exists() {
                return DocScore::Missing;
            }
            let text = match std::fs::read_to_string(&path) {
                Ok(text) => text,
                Err(e) => return DocScore::Failed(e.to_string()),
            };
            let predicted: EventTimeline = match serde_json::from_str(&text) {
                Ok(timeline) => timeline,
                Err(e) => return DocScore::Failed(format!("unparseable prediction: {e}")),
            };
            if predicted.is_empty() {
                return DocScore::Failed("prediction holds no events".to_string());
            }
            match score_timeline(&predicted, &record.timeline, embedder.as_ref()) {
                Ok(score) => DocScore::Scored(score),
                Err(e) => DocScore::Failed(e.to_string()),
            }
        });

    let scores_path = cfg.run.paths.output_dir.join("scores.jsonl");
    std::fs::create_dir_all(&cfg.run.paths.output_dir)?;
    let mut writer = std::io::BufWriter::new(
        std::fs::File::create(&scores_path)
            .with_context(|| format!("creating {}", scores_path.display()))?,
    );

    let mut scored = 0usize;
    let mut failed = 0usize;
    let (mut sum_p, mut sum_r, mut sum_f1) = (0.0f64, 0.0f64, 0.0f64);
    for (record, result) in corpus.records.iter().zip(&results) {
        match result {
            DocScore::Scored(score) => {
                scored += 1;
                sum_p += score.precision;
                sum_r += score.recall;
                sum_f1 += score.f1;
                let line = ScoreLine {
                    id: &record.id,
                    precision: score.precision,
                    recall: score.recall,
                    f1: score.f1,
                };
                writeln!(writer, "{}", serde_json::to_string(&line)?)?;
            }
            DocScore::Missing => {
                failed += 1;
                eprintln!("warning: no prediction for {}, skipped", record.id);
            }
            DocScore::Failed(message) => {
                failed += 1;
                eprintln!("warning: scoring {} failed: {message}", record.id);
            }
        }
    }

    if scored == 0 {
        bail!("no document could be scored");
    }
    let aggregate = ScoreLine {
        id: "aggregate",
        precision: sum_p / scored as f64,
        recall: sum_r / scored as f64,
        f1: sum_f1 / scored as f64,
    };
    writeln!(writer, "{}", serde_json::to_string(&aggregate)?)?;
    writer.flush()?;

    println!(
        "score: {scored} document(s) scored, {failed} skipped, mean F1 {:.4}",
        sum_f1 / scored as f64
    );
    Ok(failed)
}
