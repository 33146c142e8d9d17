//! Append-only per-document status ledger for resumable batches.
//!
//! One JSON object per line; the latest line for a document wins. A crash
//! loses at most the in-flight document. Re-invoking a batch with an intact
//! ledger skips done documents and retries failed ones until the attempt
//! cap.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Mutex;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocStatus {
    Done,
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub id: String,
    pub status: DocStatus,
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug)]
pub struct BatchLedger {
    entries: HashMap<String, LedgerEntry>,
    writer: Mutex<std::fs::File>,
}

impl BatchLedger {
    /// Open a ledger, replaying any existing log.
    pub fn open(path: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        if path.exists() {
            let file = std::fs::File::open(path)
                .with_context(|| format!("opening ledger {}", path.display()))?;
            for line in std::io::BufReader::new(file).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: LedgerEntry =
                    serde_json::from_str(&line).with_context(|| "parsing ledger line")?;
                entries.insert(entry.id.clone(), entry);
            }
        }
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let writer = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("opening ledger {} for append", path.display()))?;
        Ok(Self {
            entries,
            writer: Mutex::new(writer),
        })
    }

    /// Start a fresh ledger, discarding any previous log.
    pub fn fresh(path: &Path) -> Result<Self> {
        if path.exists() {
            std::fs::remove_file(path)
                .with_context(|| format!("clearing ledger {}", path.display()))?;
        }
        Self::open(path)
    }

    pub fn entry(&self, id: &str) -> Option<&LedgerEntry> {
        self.entries.get(id)
    }

    /// Should this document be (re)processed under the attempt cap?
    pub fn should_process(&self, id: &str, attempt_cap: u32) -> bool {
        match self.entries.get(id) {
            None => true,
            Some(entry) => entry.status == DocStatus::Failed && entry.attempts < attempt_cap,
        }
    }

    pub fn prior_attempts(&self, id: &str) -> u32 {
        self.entries.get(id).map(|e| e.attempts).unwrap_or(0)
    }

    /// Append an entry; safe to call from worker threads.
    pub fn record(&self, entry: LedgerEntry) -> Result<()> {
        let line = serde_json::to_string(&entry)?;
        let mut writer = self.writer.lock().unwrap();
        writeln!(writer, "{line}")?;
        writer.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replays_latest_entry_per_document() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("batch.ledger.jsonl");
        {
            let ledger = BatchLedger::open(&path).unwrap();
            ledger
                .record(LedgerEntry {
                    id: "doc-0001".into(),
                    status: DocStatus::Failed,
                    attempts: 1,
                    error: Some("boom".into()),
                })
                .unwrap();
            ledger
                .record(LedgerEntry {
                    id: "doc-0001".into(),
                    status: DocStatus::Done,
                    attempts: 2,
                    error: None,
                })
                .unwrap();
        }
        let ledger = BatchLedger::open(&path).unwrap();
        assert_eq!(ledger.entry("doc-0001").unwrap().status, DocStatus::Done);
        assert!(!ledger.should_process("doc-0001", 3));
        assert!(ledger.should_process("doc-0002", 3));
    }

    #[test]
    fn failed_documents_retry_until_the_cap() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("batch.ledger.jsonl");
        let ledger = BatchLedger::open(&path).unwrap();
        ledger
            .record(LedgerEntry {
                id: "doc-0001".into(),
                status: DocStatus::Failed,
                attempts: 2,
                error: None,
            })
            .unwrap();
        drop(ledger);
        let ledger = BatchLedger::open(&path).unwrap();
        assert!(ledger.should_process("doc-0001", 3));
        assert!(!ledger.should_process("doc-0001", 2));
        assert_eq!(ledger.prior_attempts("doc-0001"), 2);
    }
}
