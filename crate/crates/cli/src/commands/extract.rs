//! `extract`: run the refinement loop over every corpus document, writing
//! one timeline and one run manifest per document, tracked in a ledger.

use std::path::Path;

use anyhow::{bail, Context, Result};
use casetime::corpus::Corpus;
use casetime::refine::{run_refinement, AgentEndpoint, RefinementTemplates};

use crate::config::{LoadedConfig, CREATIVE_TEMPERATURE, SCORING_TEMPERATURE};
use crate::ledger::{BatchLedger, DocStatus, LedgerEntry};

pub fn cmd_extract(cfg: &LoadedConfig, resume: bool) -> Result<usize> {
    let corpus = Corpus::read_jsonl_file(&cfg.run.paths.corpus_file)
        .map_err(|e| anyhow::anyhow!(e.to_string()))
        .with_context(|| format!("reading corpus {}", cfg.run.paths.corpus_file.display()))?;
    if corpus.is_empty() {
        bail!("corpus {} is empty", cfg.run.paths.corpus_file.display());
    }

    let extraction_role = cfg.role("extraction")?;
    let feedback_role = cfg.role("feedback")?;
    let extraction_backend = extraction_role.chat_backend(cfg.run.seed)?;
    let feedback_backend = feedback_role.chat_backend(cfg.run.seed)?;
    let extraction_profile = extraction_role.profile(CREATIVE_TEMPERATURE);
    let feedback_profile = feedback_role.profile(SCORING_TEMPERATURE);

    let output_dir = &cfg.run.paths.output_dir;
    let timelines_dir = output_dir.join("timelines");
    let manifests_dir = output_dir.join("manifests");
    std::fs::create_dir_all(&timelines_dir)?;
    std::fs::create_dir_all(&manifests_dir)?;

    let ledger_path = output_dir.join("extract.ledger.jsonl");
    let ledger = if resume {
        BatchLedger::open(&ledger_path)?
    } else {
        BatchLedger::fresh(&ledger_path)?
    };

    let jobs: Vec<usize> = (0..corpus.len())
        .filter(|&i| ledger.should_process(&corpus.records[i].id, cfg.run.max_doc_attempts))
        .collect();
    let skipped_done = corpus.len() - jobs.len();

    let templates = RefinementTemplates::from(&cfg.templates);
    let outcomes: Vec<Result<LedgerEntry>> =
        crate::batch::run_parallel(jobs.len(), cfg.run.concurrency, |slot| {
            let record = &corpus.records[jobs[slot]];
            let judgment = record.judgment_document();
            let attempts = ledger.prior_attempts(&record.id) + 1;
            let entry = match run_refinement(
                &judgment,
                &AgentEndpoint {
                    backend: extraction_backend.as_ref(),
                    profile: extraction_profile.clone(),
                },
                &AgentEndpoint {
                    backend: feedback_backend.as_ref(),
                    profile: feedback_profile.clone(),
                },
                &templates,
                &cfg.run.refinement,
            ) {
                Ok(result) => {
                    write_pretty(
                        &timelines_dir.join(format!("{}.json", record.id)),
                        &result.selected_timeline,
                    )?;
                    write_pretty(
                        &manifests_dir.join(format!("{}.json", record.id)),
                        &result.manifest(&record.id, &cfg.run.refinement),
                    )?;
                    LedgerEntry {
                        id: record.id.clone(),
                        status: DocStatus::Done,
                        attempts,
                        error: None,
                    }
                }
                Err(error) => LedgerEntry {
                    id: record.id.clone(),
                    status: DocStatus::Failed,
                    attempts,
                    error: Some(error.to_string()),
                },
            };
            ledger.record(entry.clone())?;
            Ok(entry)
        });

    let mut processed = 0usize;
    let mut newly_failed = 0usize;
    for outcome in &outcomes {
        match outcome {
            Ok(entry) if entry.status == DocStatus::Done => processed += 1,
            Ok(entry) => {
                newly_failed += 1;
                eprintln!(
                    "warning: {} failed (attempt {}): {}",
                    entry.id,
                    entry.attempts,
                    entry.error.as_deref().unwrap_or("unknown")
                );
            }
            Err(e) => bail!("batch infrastructure failure: {e}"),
        }
    }

    // Documents still failed after this run (including ones at the cap).
    let failed_total: usize = corpus
        .records
        .iter()
        .filter(|record| {
            let latest = outcomes
                .iter()
                .flatten()
                .find(|entry| entry.id == record.id)
                .map(|entry| entry.status)
                .or_else(|| ledger.entry(&record.id).map(|entry| entry.status));
            latest != Some(DocStatus::Done)
        })
        .count();

    println!(
        "extract: {processed} extracted, {newly_failed} failed this run, {skipped_done} skipped, {failed_total} documents unresolved"
    );
    Ok(failed_total)
}

fn write_pretty<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, format!("{}\n", serde_json::to_string_pretty(value)?))
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
