//! `judge`: for a seeded sample of judgments, summarize from both input
//! representations, run the pairwise judge, and tally preferences.

use std::io::Write;

use anyhow::{bail, Context, Result};
use casetime::corpus::Corpus;
use casetime::eval::{
    pairwise_judge, summarize, tally_preferences, JudgeVerdict, SummaryInput, SummaryPair,
};
use casetime::gateway::mix_seed;
use casetime::refine::AgentEndpoint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{LoadedConfig, CREATIVE_TEMPERATURE, SCORING_TEMPERATURE};

pub fn cmd_judge(cfg: &LoadedConfig, sample: usize) -> Result<usize> {
    let corpus = Corpus::read_jsonl_file(&cfg.run.paths.corpus_file)
        .map_err(|e| anyhow::anyhow!(e.to_string()))?;
    if sample == 0 {
        bail!("--sample must be at least 1");
    }
    if sample > corpus.len() {
        bail!(
            "sample size {sample} exceeds corpus size {}",
            corpus.len()
        );
    }

    let summarizer_role = cfg.role("summarizer")?;
    let judge_role = cfg.role("judge")?;
    let summarizer_backend = summarizer_role.chat_backend(cfg.run.seed)?;
    let judge_backend = judge_role.chat_backend(cfg.run.seed)?;
    let summarizer = AgentEndpoint {
        backend: summarizer_backend.as_ref(),
        profile: summarizer_role.profile(CREATIVE_TEMPERATURE),
    };
    let judge = AgentEndpoint {
        backend: judge_backend.as_ref(),
        profile: judge_role.profile(SCORING_TEMPERATURE),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.run.seed, "judge-sample"));
    let sampled: Vec<usize> = rand::seq::index::sample(&mut rng, corpus.len(), sample).into_vec();

    let options = cfg.run.judge_protocol.options();
    let outcomes: Vec<Result<JudgeVerdict, String>> =
        crate::batch::run_parallel(sampled.len(), cfg.run.concurrency, |slot| {
            let record = &corpus.records[sampled[slot]];
            let judgment = record.judgment_document();
            let run = || -> Result<JudgeVerdict, String> {
                let unstructured =
                    summarize(SummaryInput::Unstructured(&judgment), &summarizer, &cfg.templates.summary)
                        .map_err(|e| e.to_string())?;
                let structured =
                    summarize(SummaryInput::Structured(&record.timeline), &summarizer, &cfg.templates.summary)
                        .map_err(|e| e.to_string())?;
                let pair = SummaryPair {
                    judgment_id: record.id.clone(),
                    unstructured_summary: unstructured.text,
                    structured_summary: structured.text,
                    summarizer_tag: summarizer.profile.model_name.clone(),
                };
                pairwise_judge(&judgment, &pair, &judge, &cfg.templates.judge, &options)
                    .map_err(|e| e.to_string())
            };
            run()
        });

    let output_dir = &cfg.run.paths.output_dir;
    std::fs::create_dir_all(output_dir)?;
    let verdicts_path = output_dir.join("verdicts.jsonl");
    let mut writer = std::io::BufWriter::new(
        std::fs::File::create(&verdicts_path)
            .with_context(|| format!("creating {}", verdicts_path.display()))?,
    );

    let mut verdicts = Vec::new();
    let mut failed = 0usize;
    for (slot, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(verdict) => {
                writeln!(writer, "{}", serde_json::to_string(&verdict)?)?;
                verdicts.push(verdict);
            }
            Err(message) => {
                failed += 1;
                let id = &corpus.records[sampled[slot]].id;
                eprintln!("warning: judging {id} failed: {message}");
            }
        }
    }
    writer.flush()?;

    #[derive(serde::Serialize)]
    struct TallyReport {
        structured_wins: usize,
        unstructured_wins: usize,
        inconsistent: usize,
        total: usize,
        structured_ratio: f64,
    }
    let tally = tally_preferences(&verdicts);
    let tally_report = TallyReport {
        structured_wins: tally.structured_wins,
        unstructured_wins: tally.unstructured_wins,
        inconsistent: tally.inconsistent,
        total: tally.total(),
        structured_ratio: tally.structured_ratio(),
    };
    std::fs::write(
        output_dir.join("tally.json"),
        format!("{}\n", serde_json::to_string_pretty(&tally_report)?),
    )?;

    println!(
        "judge: {} verdict(s): structured {}, unstructured {}, inconsistent {}, failed {failed}",
        tally.total(),
        tally.structured_wins,
        tally.unstructured_wins,
        tally.inconsistent
    );
    Ok(failed)
}
