pub mod extract;
pub mod generate;
pub mod judge;
pub mod score;
pub mod stats;

use std::path::Path;

use anyhow::{Context, Result};
use casetime::corpus::{category_counts, corpus_stats, Corpus, CorpusStats};
use casetime::les::CategoryCounts;

/// Stats report written next to every corpus: aggregate statistics plus
/// record counts per category.
#[derive(serde::Serialize)]
struct StatsReport {
    #[serde(flatten)]
    stats: CorpusStats,
    records: usize,
    per_category_counts: CategoryCounts,
}

pub fn write_stats_report(corpus: &Corpus, path: &Path) -> Result<()> {
    let report = StatsReport {
        stats: corpus_stats(corpus).map_err(|e| anyhow::anyhow!(e.to_string()))?,
        records: corpus.len(),
        per_category_counts: category_counts(corpus),
    };
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, format!("{}\n", serde_json::to_string_pretty(&report)?))
        .with_context(|| format!("writing stats report {}", path.display()))?;
    Ok(())
}
