//! `stats`: recompute and report corpus statistics.

use anyhow::Result;
use casetime::corpus::{corpus_stats, Corpus};

use crate::config::LoadedConfig;

pub fn cmd_stats(cfg: &LoadedConfig) -> Result<usize> {
    let corpus = Corpus::read_jsonl_file(&cfg.run.paths.corpus_file)
        .map_err(|e| anyhow::anyhow!(e.to_string()))?;
    let stats = corpus_stats(&corpus).map_err(|e| anyhow::anyhow!(e.to_string()))?;
    super::write_stats_report(&corpus, &cfg.run.paths.output_dir.join("stats.json"))?;
    println!(
        "stats: {} record(s), avg judgment length {:.2}, avg events/case {:.2}, \
         avg precedents/case {:.2}, vocab {}",
        corpus.len(),
        stats.avg_judgment_length,
        stats.avg_events_per_case,
        stats.avg_precedents_per_case,
        stats.unique_vocab_size
    );
    Ok(0)
}
