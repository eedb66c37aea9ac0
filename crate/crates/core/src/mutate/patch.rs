// SPDX-License-Identifier: Apache-2.0

//! Line patches over strategy documents.
//!
//! ```text
//! replace 0 cost = base_len + 4 * overflow_excess + history
//! insert 2 grid = 4 1 0
//! delete 5
//! ```
//!
//! Indices are 0-based and refer to the document as left by the previous
//! edit.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::router::{RouterStrategy, StrategyDoc};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum LineEdit {
    Replace { index: usize, text: String },
    Insert { index: usize, text: String },
    Delete { index: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Patch {
    pub edits: Vec<LineEdit>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatchError {
    #[error("patch line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("edit {edit} targets line {index} of a {len}-line document")]
    OutOfBounds { edit: usize, index: usize, len: usize },
    #[error("patched document is invalid: {0}")]
    Invalid(String),
}

/// Result of applying a patch.
#[derive(Clone, Debug, PartialEq)]
pub struct Applied {
    pub doc: StrategyDoc,
    pub strategy: RouterStrategy,
    /// Line edit distance between the old and the new canonical document.
    pub loc_modified: usize,
}

/// Minimum number of single-line replacements, insertions and deletions
/// turning `a` into `b`.
pub fn line_distance<S: AsRef<str>, T: AsRef<str>>(a: &[S], b: &[T]) -> usize {
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = diag + usize::from(x.as_ref() != y.as_ref());
            diag = row[j + 1];
            row[j + 1] = sub.min(row[j] + 1).min(row[j + 1] + 1);
        }
    }
    row[b.len()]
}

impl Patch {
    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    /// A minimal edit script from `old` to `new`, last line first so that
    /// sequential indices stay valid.
    pub fn between<S: AsRef<str>, T: AsRef<str>>(old: &[S], new: &[T]) -> Patch {
        let (n, m) = (old.len(), new.len());
        let mut d = vec![vec![0usize; m + 1]; n + 1];
        for (i, row) in d.iter_mut().enumerate() {
            row[0] = i;
        }
        for (j, cell) in d[0].iter_mut().enumerate() {
            *cell = j;
        }
        for i in 1..=n {
            for j in 1..=m {
                let sub = d[i - 1][j - 1] + usize::from(old[i - 1].as_ref() != new[j - 1].as_ref());
                d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
            }
        }
        let (mut i, mut j) = (n, m);
        let mut edits = Vec::new();
        while i > 0 || j > 0 {
            if i > 0 && j > 0 && old[i - 1].as_ref() == new[j - 1].as_ref() && d[i][j] == d[i - 1][j - 1] {
                i -= 1;
                j -= 1;
            } else if i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + 1 {
                edits.push(LineEdit::Replace { index: i - 1, text: new[j - 1].as_ref().to_string() });
                i -= 1;
                j -= 1;
            } else if i > 0 && d[i][j] == d[i - 1][j] + 1 {
                edits.push(LineEdit::Delete { index: i - 1 });
                i -= 1;
            } else {
                edits.push(LineEdit::Insert { index: i, text: new[j - 1].as_ref().to_string() });
                j -= 1;
            }
        }
        Patch { edits }
    }

    pub fn parse(text: &str) -> Result<Patch, PatchError> {
        let mut edits = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: String| PatchError::Syntax { line: no + 1, message };
            let (op, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim_start();
            let (idx, text) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
            let index: usize = idx.parse().map_err(|_| syntax(format!("bad line index `{idx}`")))?;
            let text = text.trim().to_string();
            edits.push(match op {
                "replace" => LineEdit::Replace { index, text },
                "insert" => LineEdit::Insert { index, text },
                "delete" if text.is_empty() => LineEdit::Delete { index },
                "delete" => return Err(syntax("delete takes no text".into())),
                other => return Err(syntax(format!("unknown edit `{other}`"))),
            });
        }
        Ok(Patch { edits })
    }

    /// Applies the edits to raw lines. All or nothing.
    pub fn apply_lines(&self, lines: &[&str]) -> Result<Vec<String>, PatchError> {
        let mut out: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
        for (k, e) in self.edits.iter().enumerate() {
            let len = out.len();
            let oob = |index| PatchError::OutOfBounds { edit: k, index, len };
            match e {
                LineEdit::Replace { index, text } => *out.get_mut(*index).ok_or_else(|| oob(*index))? = text.clone(),
                LineEdit::Insert { index, text } if *index <= len => out.insert(*index, text.clone()),
                LineEdit::Insert { index, .. } => return Err(oob(*index)),
                LineEdit::Delete { index } if *index < len => {
                    out.remove(*index);
                }
                LineEdit::Delete { index } => return Err(oob(*index)),
            }
        }
        Ok(out)
    }

    /// Applies the patch and canonicalizes the result. `doc` is untouched on
    /// failure.
    pub fn apply(&self, doc: &StrategyDoc) -> Result<Applied, PatchError> {
        let old = doc.lines();
        let lines = self.apply_lines(&old)?;
        let mut text = lines.join("\n");
        text.push('\n');
        let (new, strategy) = StrategyDoc::canonicalize(&text).map_err(|e| PatchError::Invalid(e.to_string()))?;
        let loc_modified = line_distance(&old, &new.lines());
        Ok(Applied { doc: new, strategy, loc_modified })
    }
}

impl fmt::Display for Patch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.edits {
            match e {
                LineEdit::Replace { index, text } => writeln!(f, "replace {index} {text}")?,
                LineEdit::Insert { index, text } => writeln!(f, "insert {index} {text}")?,
                LineEdit::Delete { index } => writeln!(f, "delete {index}")?,
            }
        }
        Ok(())
    }
}
