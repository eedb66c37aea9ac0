// SPDX-License-Identifier: Apache-2.0

//! Mutation providers. Each proposal is a line patch against the current
//! strategy document, built only from what the run directory holds.

pub mod external;
pub mod patch;
pub mod scripted;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::QorRecord;
use crate::pareto::ObjectiveSpec;

pub use external::{CommandProvider, HttpProvider};
pub use patch::{line_distance, Applied, LineEdit, Patch, PatchError};
pub use scripted::ScriptedProvider;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MutationError {
    #[error("provider timed out after {0} s")]
    Timeout(u64),
    #[error("malformed reply: {0}")]
    Malformed(String),
    #[error("provider failed: {0}")]
    Failed(String),
}

/// One entry of the version log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionEntry {
    pub iteration: u32,
    pub candidate_id: String,
    pub parent_id: Option<String>,
    pub loc_modified: usize,
    pub summary: String,
}

/// Everything a provider may see. Rebuilt from disk for every proposal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutationContext {
    pub iteration: u32,
    /// Repair attempt within the iteration; 0 for the first proposal.
    pub attempt: u32,
    pub objectives: ObjectiveSpec,
    pub baseline: QorRecord,
    pub history: Vec<QorRecord>,
    pub version_log: Vec<VersionEntry>,
    pub current_id: String,
    pub current_doc: String,
    /// Failures of earlier attempts in this iteration, oldest first.
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Proposal {
    pub patch: Patch,
    pub summary: String,
}

pub trait Provider {
    fn propose(&mut self, ctx: &MutationContext) -> Result<Proposal, MutationError>;
}

/// Wraps a provider so that the first attempt of every iteration yields a
/// patch whose result does not parse. Exercises the repair loop.
pub struct BrokenFirstAttempt<P>(pub P);

impl<P: Provider> Provider for BrokenFirstAttempt<P> {
    fn propose(&mut self, ctx: &MutationContext) -> Result<Proposal, MutationError> {
        if ctx.attempt == 0 {
            let edits = vec![LineEdit::Insert { index: 0, text: "cost = base_len +".into() }];
            return Ok(Proposal { patch: Patch { edits }, summary: "broken on purpose".into() });
        }
        self.0.propose(ctx)
    }
}

/// Body of the first fenced block tagged `tag`.
pub fn fenced_block<'a>(reply: &'a str, tag: &str) -> Option<&'a str> {
    let mut rest = reply;
    while let Some(start) = rest.find("```") {
        let after = &rest[start + 3..];
        let header_end = after.find('\n')?;
        let header = after[..header_end].trim();
        let body = &after[header_end + 1..];
        let close = body.find("```")?;
        if header == tag {
            return Some(&body[..close]);
        }
        rest = &body[close + 3..];
    }
    None
}

/// Extracts the proposal from free-form reply text: a `patch` block, or a
/// whole document in a `strategy` block. Everything else is ignored.
pub fn proposal_from_reply(reply: &str, current_doc: &str) -> Result<Proposal, MutationError> {
    let summary =
        reply.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with("```")).unwrap_or("").chars().take(120).collect::<String>();
    if let Some(body) = fenced_block(reply, "patch") {
        let patch = Patch::parse(body).map_err(|e| MutationError::Malformed(e.to_string()))?;
        return Ok(Proposal { patch, summary });
    }
    if let Some(body) = fenced_block(reply, "strategy") {
        let old: Vec<&str> = current_doc.lines().collect();
        let new: Vec<&str> = body.lines().collect();
        return Ok(Proposal { patch: Patch::between(&old, &new), summary });
    }
    Err(MutationError::Malformed("no ```patch or ```strategy block".into()))
}

/// Fills `{{name}}` placeholders of a prompt template from the context.
pub fn render_prompt(template: &str, ctx: &MutationContext) -> String {
    let mut table = String::from("iteration\tcandidate\tstatus\tdr-wl\tdr-vc\tgr-rt\n");
    for r in &ctx.history {
        let (wl, vc, rt) =
            r.qor.map_or(("-".into(), "-".into(), "-".into()), |q| (q.dr_wl.to_string(), q.dr_vc.to_string(), q.gr_rt.to_string()));
        table.push_str(&format!("{}\t{}\t{}\t{wl}\t{vc}\t{rt}\n", r.iteration, &r.candidate_id[..12.min(r.candidate_id.len())], r.status));
    }
    let objectives = ctx.objectives.keys().iter().map(|k| k.name()).collect::<Vec<_>>().join(" > ");
    template
        .replace("{{iteration}}", &ctx.iteration.to_string())
        .replace("{{objectives}}", &objectives)
        .replace("{{history}}", &table)
        .replace("{{current_doc}}", &ctx.current_doc)
        .replace("{{errors}}", &ctx.errors.join("\n"))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::router::StrategyDoc;

    #[test]
    fn patch_block_is_extracted() {
        let reply = "Try a coarser grid.\n```patch\ninsert 1 grid = 4 0 0\n```\ntrailing words";
        let p = proposal_from_reply(reply, StrategyDoc::baseline().text()).unwrap();
        assert_eq!(p.patch.edits, vec![LineEdit::Insert { index: 1, text: "grid = 4 0 0".into() }]);
        assert_eq!(p.summary, "Try a coarser grid.");
    }

    #[test]
    fn strategy_block_becomes_a_diff() {
        let base = StrategyDoc::baseline();
        let new = base.text().replace("rrr_rounds = 8", "rrr_rounds = 4");
        let reply = format!("```text\nignored\n```\n```strategy\n{new}```\n");
        let p = proposal_from_reply(&reply, base.text()).unwrap();
        assert_eq!(p.patch.apply(&base).unwrap().strategy.rrr_max_rounds, 4);
    }

    #[test]
    fn prose_is_malformed() {
        assert!(matches!(proposal_from_reply("I would lower the cost.", ""), Err(MutationError::Malformed(_))));
        assert!(matches!(proposal_from_reply("```patch\nfrobnicate 1\n```", ""), Err(MutationError::Malformed(_))));
    }
}
