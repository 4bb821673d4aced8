use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EmbeddingModel;

use super::engine::{prepare_refit, RefitReport};

/// One applied refit, with the vectors it overwrote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub ts: DateTime<Utc>,
    pub request: super::RefitRequest,
    pub report: RefitReport,
    pub displaced: BTreeMap<String, Vec<f32>>,
}

impl LogEntry {
    pub fn new(report: RefitReport, displaced: BTreeMap<String, Vec<f32>>) -> Self {
        LogEntry {
            ts: Utc::now(),
            request: report.request.clone(),
            report,
            displaced,
        }
    }
}

/// A line of the JSON-lines audit file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
#[allow(clippy::large_enum_variant)] // short-lived, one per line written
pub enum LogRecord {
    Refit(LogEntry),
    /// Marks that the entry at position `undo` (0-based) was rolled back.
    Undo { ts: DateTime<Utc>, undo: usize },
}

/// In-memory stack of applied refits.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActionLog {
    entries: Vec<LogEntry>,
}

impl ActionLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: LogEntry) {
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn last(&self) -> Option<&LogEntry> {
        self.entries.last()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Write one record as a single JSON line.
    pub fn write_record<W: Write>(writer: &mut W, record: &LogRecord) -> Result<()> {
        serde_json::to_writer(&mut *writer, record)?;
        writer.write_all(b"\n")?;
        writer.flush()?;
        Ok(())
    }

    /// Rebuild the live stack from a JSON-lines file, applying undo markers.
    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self> {
        let mut log = ActionLog::default();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str(&line)? {
                LogRecord::Refit(entry) => log.entries.push(entry),
                LogRecord::Undo { undo, .. } => {
                    if undo + 1 != log.entries.len() {
                        return Err(Error::LineageMismatch(format!(
                            "line {}: undo of entry {undo} but the stack holds {} entries",
                            n + 1,
                            log.entries.len()
                        )));
                    }
                    log.entries.pop();
                }
            }
        }
        Ok(log)
    }

    /// Write every live entry as JSON lines.
    pub fn write_jsonl<W: Write>(&self, writer: &mut W) -> Result<()> {
        for entry in &self.entries {
            Self::write_record(writer, &LogRecord::Refit(entry.clone()))?;
        }
        Ok(())
    }
}

fn displaced_rows(model: &EmbeddingModel, entry: &LogEntry) -> Result<Vec<(usize, Vec<f32>)>> {
    entry
        .displaced
        .iter()
        .map(|(token, v)| {
            let row = model
                .vocab()
                .get(token)
                .ok_or_else(|| Error::LineageMismatch(format!("token `{token}` not in model")))?;
            Ok((row, v.clone()))
        })
        .collect()
}

/// Roll back the most recent refit, restoring the displaced vectors exactly.
pub fn undo(model: &mut EmbeddingModel, log: &mut ActionLog) -> Result<u64> {
    let entry = log.entries.last().ok_or(Error::EmptyLog)?;
    let rows = displaced_rows(model, entry)?;
    let revision = model.apply_rows(&rows)?;
    log.entries.pop();
    Ok(revision)
}

/// Re-apply every logged request to `initial`, in order.
///
/// Before each step the vectors the entry displaced must match the model
/// bit-for-bit, and the re-run must move the same tokens; otherwise the log
/// was recorded against a different model.
pub fn replay(mut initial: EmbeddingModel, log: &ActionLog) -> Result<EmbeddingModel> {
    let mut scratch = ActionLog::default();
    for (n, entry) in log.entries.iter().enumerate() {
        let mismatch = |why: String| Error::LineageMismatch(format!("entry {n}: {why}"));
        for (row, expected) in displaced_rows(&initial, entry)? {
            let same = initial
                .row(row)
                .iter()
                .zip(&expected)
                .all(|(a, b)| a.to_bits() == b.to_bits())
                && expected.len() == initial.dims();
            if !same {
                return Err(mismatch(format!("vector for `{}` differs", initial.vocab().word(row))));
            }
        }
        let prepared = prepare_refit(&initial, &entry.request).map_err(|e| match e {
            Error::UnknownToken(t) => mismatch(format!("unknown token `{t}`")),
            other => other,
        })?;
        if prepared.moved != entry.report.moved {
            return Err(mismatch(format!(
                "moved {:?}, log recorded {:?}",
                prepared.moved, entry.report.moved
            )));
        }
        prepared.commit(&mut initial, &mut scratch)?;
    }
    Ok(initial)
}
