//! `generate`: build a synthetic corpus of exactly `n` records plus its
//! stats report.

use std::io::Write;

use anyhow::{bail, Context, Result};
use casetime::corpus::{build_corpus_range, Corpus, CorpusTemplates, GeneratorBackend};

use crate::config::{LoadedConfig, CREATIVE_TEMPERATURE};

pub fn cmd_generate(cfg: &LoadedConfig, n: usize, resume: bool) -> Result<usize> {
    if n == 0 {
        bail!("--n must be at least 1");
    }
    let primary_role = cfg.role("generation")?;
    let mut roles = vec![primary_role];
    if let Some(secondary) = &cfg.run.backends.generation_secondary {
        roles.push(secondary);
    }
    let backends: Vec<_> = roles
        .iter()
        .map(|role| role.chat_backend(cfg.run.seed).map(|b| (role, b)))
        .collect::<Result<_>>()?;
    let generators: Vec<GeneratorBackend<'_>> = backends
        .iter()
        .map(|(role, backend)| GeneratorBackend {
            tag: role.model_name.clone(),
            backend: backend.as_ref(),
            profile: role.profile(CREATIVE_TEMPERATURE),
        })
        .collect();

    let corpus_path = &cfg.run.paths.corpus_file;
    if let Some(parent) = corpus_path.parent() {
        std::fs::create_dir_all(parent)?;
    }

    let start = if resume && corpus_path.exists() {
        let existing = Corpus::read_jsonl_file(corpus_path)
            .map_err(|e| anyhow::anyhow!(e.to_string()))?;
        existing.len()
    } else {
        0
    };
    if start > n {
        bail!(
            "corpus already holds {start} records, more than the requested {n}; \
             refusing to truncate under --resume"
        );
    }

    if start < n {
        let file = if start > 0 {
            std::fs::OpenOptions::new().append(true).open(corpus_path)?
        } else {
            std::fs::File::create(corpus_path)?
        };
        let mut writer = std::io::BufWriter::new(file);
        let created_at = cfg.created_at();
        build_corpus_range(
            start,
            n,
            n,
            &generators,
            &CorpusTemplates::from(&cfg.templates),
            cfg.run.seed,
            &created_at,
            &cfg.run.generation.options(),
            |record| {
                let line = serde_json::to_string(record)
                    .map_err(|e| casetime::corpus::CorpusError::Serde(e.to_string()))?;
                writeln!(writer, "{line}").map_err(casetime::corpus::CorpusError::Io)?;
                writer.flush().map_err(casetime::corpus::CorpusError::Io)
            },
        )
        .map_err(|e| anyhow::anyhow!(e.to_string()))?;
    }

    let corpus = Corpus::read_jsonl_file(corpus_path)
        .map_err(|e| anyhow::anyhow!(e.to_string()))
        .with_context(|| "re-reading generated corpus")?;
    super::write_stats_report(&corpus, &cfg.run.paths.output_dir.join("stats.json"))?;

    println!(
        "generate: {} record(s) in {} ({} new)",
        corpus.len(),
        corpus_path.display(),
        n - start
    );
    Ok(0)
}
