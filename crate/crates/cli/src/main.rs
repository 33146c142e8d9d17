//! Operator CLI for the timeline engine.
//!
//! Exit convention: 0 when every document succeeded, 2 when some documents
//! failed but the batch completed (partial), 1 on fatal errors (bad config,
//! unreadable corpus, infrastructure failures).

mod batch;
mod commands;
mod config;
mod ledger;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::LoadedConfig;

#[derive(Parser)]
#[command(
    name = "casetime",
    about = "Extract structured event timelines from judgment documents: \
             synthetic corpus generation, dual-agent refinement, semantic \
             scoring, and pairwise summary judging"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus of n records plus a stats report.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Total corpus size.
        #[arg(long)]
        n: usize,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Keep existing records and continue to n.
        #[arg(long)]
        resume: bool,
    },
    /// Run the refinement loop over every corpus document.
    Extract {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Consult the ledger: skip done documents, retry failed ones.
        #[arg(long)]
        resume: bool,
    },
    /// Score extracted timelines against the gold corpus.
    Score {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Summarize a judgment sample both ways and judge the pairs.
    Judge {
        #[arg(long)]
        config: PathBuf,
        /// Number of judgments to sample.
        #[arg(long)]
        sample: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recompute corpus statistics.
    Stats {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, config_path, seed) = match &cli.command {
        Command::Generate { config, seed, .. } => ("generate", config.clone(), *seed),
        Command::Extract { config, seed, .. } => ("extract", config.clone(), *seed),
        Command::Score { config, seed } => ("score", config.clone(), *seed),
        Command::Judge { config, seed, .. } => ("judge", config.clone(), *seed),
        Command::Stats { config } => ("stats", config.clone(), None),
    };

    let cfg = match LoadedConfig::load(&config_path, seed) {
        Ok(cfg) => cfg,
        Err(error) => {
            eprintln!("error: {error:#}");
            return ExitCode::from(1);
        }
    };

    let outcome = match &cli.command {
        Command::Generate { n, resume, .. } => commands::generate::cmd_generate(&cfg, *n, *resume),
        Command::Extract { resume, .. } => commands::extract::cmd_extract(&cfg, *resume),
        Command::Score { .. } => commands::score::cmd_score(&cfg),
        Command::Judge { sample, .. } => commands::judge::cmd_judge(&cfg, *sample),
        Command::Stats { .. } => commands::stats::cmd_stats(&cfg),
    };

    match outcome {
        Ok(0) => ExitCode::from(0),
        Ok(_failed) => ExitCode::from(2),
        Err(error) => {
            eprintln!("error: {error:#}");
            write_error_report(&cfg, name, &error);
            ExitCode::from(1)
        }
    }
}

/// Best-effort machine-readable error report for scripted pipelines.
fn write_error_report(cfg: &LoadedConfig, command: &str, error: &anyhow::Error) {
    let report = serde_json::json!({
        "command": command,
        "error": format!("{error:#}"),
    });
    let path = cfg.run.paths.output_dir.join("error.json");
    if std::fs::create_dir_all(&cfg.run.paths.output_dir).is_ok() {
        let _ = std::fs::write(
            path,
            format!("{}\n", serde_json::to_string_pretty(&report).unwrap_or_default()),
        );
    }
}
