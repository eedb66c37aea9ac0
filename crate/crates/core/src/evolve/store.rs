// SPDX-License-Identifier: Apache-2.0

//! Run directory layout:
//!
//! ```text
//! config.snapshot      resolved config (TOML)
//! store/objects/<id>   strategy documents keyed by content hash
//! store/log            iteration, candidate, parent, loc, summary (tab-separated)
//! qor_history.jsonl    one record per iteration
//! lock                 present while a writer is attached
//! ```
//!
//! The history is the commit point of an iteration: objects and the log
//! line are written first, and log lines beyond the last history record are
//! discarded on resume.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{EvolutionConfig, EvolveError};
use crate::eval::QorRecord;
use crate::io::{encode_record, parse_history};
use crate::mutate::VersionEntry;
use crate::router::content_id;

pub const SNAPSHOT: &str = "config.snapshot";
pub const HISTORY: &str = "qor_history.jsonl";
pub const LOCK: &str = "lock";
const OBJECTS: &str = "store/objects";
const LOG: &str = "store/log";

fn io_err(path: &Path, e: std::io::Error) -> EvolveError {
    EvolveError::Io(format!("{}: {e}", path.display()))
}

/// Read access to a run directory. Safe alongside a writer.
#[derive(Clone, Debug)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, EvolveError> {
        let root = root.into();
        for p in [SNAPSHOT, HISTORY, LOG] {
            if !root.join(p).is_file() {
                return Err(EvolveError::Run(format!("{} is not a run directory: missing {p}", root.display())));
            }
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn config(&self) -> Result<EvolutionConfig, EvolveError> {
        let p = self.path(SNAPSHOT);
        let text = fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
        EvolutionConfig::from_toml(&text)
    }

    /// Parsed history. Every line must parse and iterations must run 0, 1, ...
    pub fn history(&self) -> Result<Vec<QorRecord>, EvolveError> {
        let p = self.path(HISTORY);
        let text = fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
        let records = parse_history(&text).map_err(|e| EvolveError::History { line: e.line(), message: e.to_string() })?;
        for (i, r) in records.iter().enumerate() {
            if r.iteration as usize != i {
                return Err(EvolveError::History {
                    line: i + 1,
                    message: format!("history line {} holds iteration {}, expected {i}", i + 1, r.iteration),
                });
            }
        }
        Ok(records)
    }

    pub fn object(&self, id: &str) -> Result<String, EvolveError> {
        if id.len() != 64 || !id.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(EvolveError::Run(format!("`{id}` is not a candidate id")));
        }
        let p = self.path(OBJECTS).join(id);
        let text = fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
        if content_id(text.as_bytes()) != id {
            return Err(EvolveError::Run(format!("object {id} does not match its hash")));
        }
        Ok(text)
    }

    /// Ids of every stored object, sorted.
    pub fn object_ids(&self) -> Result<Vec<String>, EvolveError> {
        let p = self.path(OBJECTS);
        let mut ids: Vec<String> = fs::read_dir(&p)
            .map_err(|e| io_err(&p, e))?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .collect();
        ids.sort();
        Ok(ids)
    }

    /// Raw log lines; a final line without newline is ignored.
    fn log_lines(&self) -> Result<Vec<String>, EvolveError> {
        let p = self.path(LOG);
        let text = fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
        let complete = text.rfind('\n').map_or("", |i| &text[..=i]);
        Ok(complete.lines().map(String::from).collect())
    }

    /// Version log entries up to and including `last_iteration`.
    pub fn version_log(&self, last_iteration: u32) -> Result<Vec<VersionEntry>, EvolveError> {
        let mut out = Vec::new();
        for (n, line) in self.log_lines()?.iter().enumerate() {
            let e = parse_log_line(line).ok_or_else(|| EvolveError::Run(format!("store/log line {} is malformed", n + 1)))?;
            if e.iteration > last_iteration {
                break;
            }
            out.push(e);
        }
        Ok(out)
    }
}

fn escape(summary: &str) -> String {
    summary.chars().map(|c| if c == '\t' || c == '\n' || c == '\r' { ' ' } else { c }).collect()
}

fn log_line(e: &VersionEntry) -> String {
    format!("{}\t{}\t{}\t{}\t{}\n", e.iteration, e.candidate_id, e.parent_id.as_deref().unwrap_or("-"), e.loc_modified, escape(&e.summary))
}

fn parse_log_line(line: &str) -> Option<VersionEntry> {
    let mut f = line.splitn(5, '\t');
    let iteration = f.next()?.parse().ok()?;
    let candidate_id = f.next()?.to_string();
    let parent_id = match f.next()? {
        "-" => None,
        p => Some(p.to_string()),
    };
    let loc_modified = f.next()?.parse().ok()?;
    let summary = f.next()?.to_string();
    Some(VersionEntry { iteration, candidate_id, parent_id, loc_modified, summary })
}

/// Exclusive write access, released on drop.
#[derive(Debug)]
pub struct RunWriter {
    dir: RunDir,
    lock: PathBuf,
}

impl RunWriter {
    /// Creates a fresh run directory. Fails if one with a history exists;
    /// a directory left before its baseline was committed is reused.
    pub fn create(root: &Path, config: &EvolutionConfig) -> Result<Self, EvolveError> {
        if fs::metadata(root.join(HISTORY)).is_ok_and(|m| m.len() > 0) {
            return Err(EvolveError::Run(format!("{} already holds a run; use resume", root.display())));
        }
        fs::create_dir_all(root.join(OBJECTS)).map_err(|e| io_err(root, e))?;
        let w = Self::lock(root)?;
        let snap = root.join(SNAPSHOT);
        fs::write(&snap, config.to_toml()).map_err(|e| io_err(&snap, e))?;
        for p in [HISTORY, LOG] {
            let p = root.join(p);
            File::create(&p).map_err(|e| io_err(&p, e))?;
        }
        Ok(w)
    }

    /// Attaches to an existing run.
    pub fn attach(root: &Path) -> Result<Self, EvolveError> {
        RunDir::open(root)?;
        Self::lock(root)
    }

    fn lock(root: &Path) -> Result<Self, EvolveError> {
        let lock = root.join(LOCK);
        let mut retried = false;
        loop {
            match OpenOptions::new().write(true).create_new(true).open(&lock) {
                Ok(mut f) => {
                    let _ = writeln!(f, "{}", std::process::id());
                    break;
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    let holder = fs::read_to_string(&lock).unwrap_or_default();
                    if !retried && holder_is_gone(holder.trim()) {
                        retried = true;
                        let _ = fs::remove_file(&lock);
                        continue;
                    }
                    return Err(EvolveError::Locked(format!(
                        "{} is locked by process {}; remove the lock file if that process is gone",
                        root.display(),
                        holder.trim()
                    )));
                }
                Err(e) => return Err(io_err(&lock, e)),
            }
        }
        Ok(Self { dir: RunDir { root: root.to_path_buf() }, lock })
    }

    pub fn dir(&self) -> &RunDir {
        &self.dir
    }

    /// Stores `text` under its hash and returns the id.
    pub fn put_object(&self, text: &str) -> Result<String, EvolveError> {
        let id = content_id(text.as_bytes());
        let p = self.dir.path(OBJECTS).join(&id);
        if !p.exists() {
            let tmp = self.dir.path(OBJECTS).join(format!(".{id}.tmp"));
            fs::write(&tmp, text).map_err(|e| io_err(&tmp, e))?;
            fs::rename(&tmp, &p).map_err(|e| io_err(&p, e))?;
        }
        Ok(id)
    }

    /// Drops log lines past `last_iteration` left by an interrupted writer.
    pub fn truncate_log(&self, last_iteration: u32) -> Result<(), EvolveError> {
        let keep: String = self.dir.version_log(last_iteration)?.iter().map(log_line).collect();
        let p = self.dir.path(LOG);
        fs::write(&p, keep).map_err(|e| io_err(&p, e))
    }

    /// Appends one iteration: log line, then the history record.
    pub fn commit(&self, entry: &VersionEntry, record: &QorRecord) -> Result<(), EvolveError> {
        append(&self.dir.path(LOG), &log_line(entry))?;
        append(&self.dir.path(HISTORY), &encode_record(record))
    }
}

/// Whether the process named in a lock file has exited. Only answerable
/// where `/proc` exists; elsewhere the lock is assumed live.
fn holder_is_gone(pid: &str) -> bool {
    let proc = Path::new("/proc");
    match pid.parse::<u32>() {
        Ok(pid) => proc.join("self").exists() && !proc.join(pid.to_string()).exists(),
        Err(_) => false,
    }
}

fn append(path: &Path, text: &str) -> Result<(), EvolveError> {
    let mut f = OpenOptions::new().append(true).open(path).map_err(|e| io_err(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| io_err(path, e))?;
    f.sync_data().map_err(|e| io_err(path, e))
}

impl Drop for RunWriter {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}
