// SPDX-License-Identifier: Apache-2.0

//! `qor_history.jsonl`: one JSON record per line, newline-terminated.

use thiserror::Error;

use crate::eval::{QorRecord, RECORD_VERSION};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HistoryError {
    #[error("history line {line} is truncated")]
    Truncated { line: usize },
    #[error("history line {line} is corrupt: {message}")]
    Corrupt { line: usize, message: String },
    #[error("history line {line} has schema version {found}, expected {RECORD_VERSION}")]
    Version { line: usize, found: u32 },
}

impl HistoryError {
    pub fn line(&self) -> usize {
        match self {
            HistoryError::Truncated { line } | HistoryError::Corrupt { line, .. } | HistoryError::Version { line, .. } => *line,
        }
    }
}

/// One history line, newline included.
pub fn encode_record(r: &QorRecord) -> String {
    let mut s = serde_json::to_string(r).expect("records always serialize");
    s.push('\n');
    s
}

pub fn emit_history(records: &[QorRecord]) -> String {
    records.iter().map(encode_record).collect()
}

pub fn parse_history(text: &str) -> Result<Vec<QorRecord>, HistoryError> {
    let mut out = Vec::new();
    let mut rest = text;
    let mut line = 0;
    while !rest.is_empty() {
        line += 1;
        let Some(end) = rest.find('\n') else {
            return Err(HistoryError::Truncated { line });
        };
        let raw = &rest[..end];
        rest = &rest[end + 1..];
        let value: serde_json::Value = serde_json::from_str(raw).map_err(|e| HistoryError::Corrupt { line, message: e.to_string() })?;
        let found = value.get("v").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if found != RECORD_VERSION {
            return Err(HistoryError::Version { line, found });
        }
        let record: QorRecord = serde_json::from_value(value).map_err(|e| HistoryError::Corrupt { line, message: e.to_string() })?;
        out.push(record);
    }
    Ok(out)
}
