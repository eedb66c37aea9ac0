// SPDX-License-Identifier: Apache-2.0

//! Replays a run's version log into a git repository, one commit per
//! iteration holding the strategy document and its history record.

use std::fs;
use std::path::Path;
use std::process::Command;

use super::{EvolveError, RunDir};
use crate::io::encode_record;

const FIXED_DATE: &str = "2000-01-01T00:00:00+00:00";

fn git(dest: &Path, args: &[&str]) -> Result<(), EvolveError> {
    let out = Command::new("git")
        .arg("-C")
        .arg(dest)
        .args(args)
        .env("GIT_AUTHOR_NAME", "routevolve")
        .env("GIT_AUTHOR_EMAIL", "routevolve@localhost")
        .env("GIT_COMMITTER_NAME", "routevolve")
        .env("GIT_COMMITTER_EMAIL", "routevolve@localhost")
        .env("GIT_AUTHOR_DATE", FIXED_DATE)
        .env("GIT_COMMITTER_DATE", FIXED_DATE)
        .output()
        .map_err(|e| EvolveError::Run(format!("cannot run git: {e}")))?;
    if !out.status.success() {
        return Err(EvolveError::Run(format!("git {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim())));
    }
    Ok(())
}

/// Writes the chain into a new repository at `dest`; returns the commit count.
pub fn export_git(dir: &RunDir, dest: &Path) -> Result<usize, EvolveError> {
    if dest.exists() && fs::read_dir(dest).map(|mut d| d.next().is_some()).unwrap_or(true) {
        return Err(EvolveError::Run(format!("{} exists and is not empty", dest.display())));
    }
    let history = dir.history()?;
    let Some(last) = history.len().checked_sub(1) else {
        return Ok(0);
    };
    let log = dir.version_log(last as u32)?;
    fs::create_dir_all(dest).map_err(|e| EvolveError::Io(format!("{}: {e}", dest.display())))?;
    git(dest, &["init", "--quiet"])?;
    for (entry, record) in log.iter().zip(&history) {
        let doc = dir.object(&entry.candidate_id)?;
        let write = |name: &str, text: &str| fs::write(dest.join(name), text).map_err(|e| EvolveError::Io(format!("{name}: {e}")));
        write("strategy.txt", &doc)?;
        write("qor.json", &encode_record(record))?;
        git(dest, &["add", "strategy.txt", "qor.json"])?;
        let message = format!(
            "iteration {}: {} {}\n\ncandidate {}\nparent {}\nloc {}\n",
            entry.iteration,
            record.status,
            entry.summary,
            entry.candidate_id,
            entry.parent_id.as_deref().unwrap_or("-"),
            entry.loc_modified
        );
        git(dest, &["commit", "--quiet", "--allow-empty", "-m", &message])?;
    }
    Ok(log.len())
}
