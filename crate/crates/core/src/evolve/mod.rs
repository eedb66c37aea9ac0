// SPDX-License-Identifier: Apache-2.0

//! The evolution loop. Every iteration starts from what is on disk: the
//! history, the version log and the incumbent document. Nothing is carried
//! over in memory, so an interrupted run resumes to the same bytes.

pub mod config;
mod export;
pub mod store;

use std::path::Path;

use thiserror::Error;

pub use config::{ClockKind, EvalConfig, EvolutionConfig, ProviderConfig, WarmStart, DEFAULT_PROMPT};
pub use export::export_git;
pub use store::{RunDir, RunWriter};

use crate::eval::{evaluate, Design, QorRecord, Status};
use crate::io::load_benchmark;
use crate::mutate::{line_distance, MutationContext, Provider, VersionEntry};
use crate::pareto::{select, ObjectiveSpec};
use crate::router::StrategyDoc;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvolveError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{message}")]
    History { line: usize, message: String },
    #[error("{0}")]
    Locked(String),
    #[error("{0}")]
    Run(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Hooks for callers driving a run.
#[derive(Default)]
pub struct Control<'a> {
    /// Stop once this iteration is committed, as if interrupted.
    pub stop_after: Option<u32>,
    /// Called with every committed record, iteration 0 included.
    pub observer: Option<&'a mut dyn FnMut(&QorRecord)>,
}

impl Control<'_> {
    fn notify(&mut self, r: &QorRecord) {
        if let Some(f) = self.observer.as_mut() {
            f(r);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    /// Index of the last committed iteration.
    pub last_iteration: u32,
    pub completed: bool,
    pub selected: QorRecord,
}

pub fn load_design(path: &Path) -> Result<Design, EvolveError> {
    let b = load_benchmark(path).map_err(EvolveError::Config)?;
    b.to_design().map_err(|e| EvolveError::Config(format!("{}: {e}", path.display())))
}

/// The incumbent under the selection rule, with iteration 0 as baseline.
pub fn incumbent<'a>(history: &'a [QorRecord], spec: &ObjectiveSpec) -> Result<&'a QorRecord, EvolveError> {
    let baseline = history.first().ok_or_else(|| EvolveError::Run("history is empty".into()))?;
    select(history, baseline, spec).map_err(|e| EvolveError::Run(e.to_string()))
}

/// Iteration 0: the stock baseline or the warm-start candidate, evaluated on
/// the target design.
struct Initial {
    doc: StrategyDoc,
    record: QorRecord,
    summary: String,
}

fn initial(config: &EvolutionConfig, design: &Design) -> Result<Initial, EvolveError> {
    let clock = config.eval.clock.clock();
    let opts = config.eval.options();
    let stock = |note: String, summary: String| -> Result<Initial, EvolveError> {
        let doc = StrategyDoc::baseline();
        let mut record = evaluate(doc.text(), design, 0, clock.as_ref(), &opts);
        if !record.is_ok() {
            return Err(EvolveError::Config(format!("baseline is {} on {}: {}", record.status, design.name, record.note)));
        }
        if !note.is_empty() {
            record.note = note;
        }
        Ok(Initial { doc, record, summary })
    };
    let Some(warm) = &config.warm_start else {
        return stock(String::new(), "baseline".into());
    };
    let (id, text) = warm_start_candidate(warm)?;
    let (doc, _) =
        StrategyDoc::canonicalize(&text).map_err(|e| EvolveError::Config(format!("warm-start candidate {id} does not validate: {e}")))?;
    let record = evaluate(doc.text(), design, 0, clock.as_ref(), &opts);
    if record.is_ok() {
        let summary = format!("warm start from {} candidate {id}", warm.run.display());
        return Ok(Initial { doc, record, summary });
    }
    stock(
        format!("warm-start candidate {id} was {} on {}; using the stock baseline", record.status, design.name),
        "baseline (warm-start fallback)".into(),
    )
}

/// Id and document of the candidate a warm start copies.
pub fn warm_start_candidate(warm: &WarmStart) -> Result<(String, String), EvolveError> {
    let src = RunDir::open(&warm.run).map_err(|e| EvolveError::Config(format!("warm start: {e}")))?;
    let id = match &warm.candidate {
        Some(id) => id.clone(),
        None => {
            let spec = src.config()?.objectives;
            incumbent(&src.history()?, &spec)?.candidate_id.clone()
        }
    };
    let text = src.object(&id).map_err(|e| EvolveError::Config(format!("warm start: {e}")))?;
    Ok((id, text))
}

/// Validates the config and evaluates iteration 0 without writing anything.
pub fn dry_run(config: &EvolutionConfig) -> Result<QorRecord, EvolveError> {
    let design = load_design(&config.design)?;
    config.provider()?;
    Ok(initial(config, &design)?.record)
}

/// Creates the run directory, evaluates iteration 0 and runs the loop.
pub fn run_evolution(config: &EvolutionConfig, provider: &mut dyn Provider, mut control: Control) -> Result<RunSummary, EvolveError> {
    let design = load_design(&config.design)?;
    let init = initial(config, &design)?;
    let writer = RunWriter::create(&config.run_dir, config)?;
    let id = writer.put_object(init.doc.text())?;
    let entry = VersionEntry { iteration: 0, candidate_id: id, parent_id: None, loc_modified: 0, summary: init.summary };
    writer.commit(&entry, &init.record)?;
    control.notify(&init.record);
    drive(&writer, config, &design, provider, control)
}

/// Continues an existing run from its last committed iteration.
pub fn resume(root: &Path, provider: &mut dyn Provider, control: Control) -> Result<RunSummary, EvolveError> {
    let writer = RunWriter::attach(root)?;
    let config = writer.dir().config()?;
    let history = writer.dir().history()?;
    if history.is_empty() {
        return Err(EvolveError::Run(format!("{} has no baseline record", root.display())));
    }
    writer.truncate_log(history.len() as u32 - 1)?;
    let design = load_design(&config.design)?;
    drive(&writer, &config, &design, provider, control)
}

fn drive(
    writer: &RunWriter,
    config: &EvolutionConfig,
    design: &Design,
    provider: &mut dyn Provider,
    mut control: Control,
) -> Result<RunSummary, EvolveError> {
    let mut last = writer.dir().history()?.len() as u32 - 1;
    while last < config.max_iterations && control.stop_after.is_none_or(|k| last < k) {
        last += 1;
        let record = iterate(writer, config, design, provider, last)?;
        control.notify(&record);
    }
    let history = writer.dir().history()?;
    Ok(RunSummary {
        last_iteration: last,
        completed: last >= config.max_iterations,
        selected: incumbent(&history, &config.objectives)?.clone(),
    })
}

fn iterate(
    writer: &RunWriter,
    config: &EvolutionConfig,
    design: &Design,
    provider: &mut dyn Provider,
    iteration: u32,
) -> Result<QorRecord, EvolveError> {
    let dir = writer.dir();
    let history = dir.history()?;
    let version_log = dir.version_log(iteration - 1)?;
    let parent = incumbent(&history, &config.objectives)?.candidate_id.clone();
    let current_doc = dir.object(&parent)?;
    let current: Vec<&str> = current_doc.lines().collect();
    let clock = config.eval.clock.clock();
    let opts = config.eval.options();
    let mut errors = Vec::new();
    for attempt in 0.. {
        let ctx = MutationContext {
            iteration,
            attempt,
            objectives: config.objectives.clone(),
            baseline: history[0].clone(),
            history: history.clone(),
            version_log: version_log.clone(),
            current_id: parent.clone(),
            current_doc: current_doc.clone(),
            errors: errors.clone(),
        };
        let (mut record, id, loc, summary) = match provider.propose(&ctx) {
            Err(e) => (QorRecord::failed(iteration, parent.clone(), Status::BuildError, e.to_string()), parent.clone(), 0, String::new()),
            Ok(p) => match p.patch.apply_lines(&current) {
                Err(e) => {
                    let r = QorRecord::failed(iteration, parent.clone(), Status::BuildError, format!("patch rejected: {e}"));
                    (r, parent.clone(), 0, p.summary)
                }
                Ok(lines) => {
                    let mut raw = lines.join("\n");
                    raw.push('\n');
                    match StrategyDoc::canonicalize(&raw) {
                        Err(e) => {
                            let id = writer.put_object(&raw)?;
                            let r = QorRecord::failed(iteration, id.clone(), Status::BuildError, format!("patch rejected: {e}"));
                            (r, id, line_distance(&current, &lines), p.summary)
                        }
                        Ok((doc, _)) => {
                            let id = writer.put_object(doc.text())?;
                            let r = evaluate(doc.text(), design, iteration, clock.as_ref(), &opts);
                            (r, id, line_distance(&current, &doc.lines()), p.summary)
                        }
                    }
                }
            },
        };
        let repairable = matches!(record.status, Status::BuildError | Status::RunError);
        if repairable && attempt < config.repair_budget {
            errors.push(format!("attempt {attempt}: {}: {}", record.status, record.note));
            continue;
        }
        record.repair_attempts = attempt;
        let entry = VersionEntry { iteration, candidate_id: id, parent_id: Some(parent), loc_modified: loc, summary };
        writer.commit(&entry, &record)?;
        return Ok(record);
    }
    unreachable!("the attempt loop returns")
}

#[cfg(test)]
mod tests;
