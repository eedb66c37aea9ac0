// SPDX-License-Identifier: Apache-2.0

//! Benchmark parsing, guide emission and history persistence.

pub mod benchmark;
pub mod guides;
pub mod history;
pub mod synth;

pub use benchmark::{emit_benchmark, parse_benchmark, Adjustment, BenchNet, BenchPin, Benchmark, ParseError};
pub use guides::{emit_guides, GUIDES_HEADER};
pub use history::{emit_history, encode_record, parse_history, HistoryError};
pub use synth::{generate, SynthParams};

use std::path::Path;

/// Reads and parses a benchmark file; the name is the file stem.
pub fn load_benchmark(path: &Path) -> Result<Benchmark, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut b = parse_benchmark(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    b.name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(b)
}

#[cfg(test)]
mod tests;
