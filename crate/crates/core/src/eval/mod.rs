// SPDX-License-Identifier: Apache-2.0

//! Two-stage evaluation of a strategy document: global routing on the
//! coarse grid, then the detailed-routing proxy on a refined grid, with the
//! pins held fixed.

pub mod dr;

use std::fmt;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::grid::{metrics, GcellGrid, Net, QorVector};
use crate::router::{content_id, route_all, StrategyDoc};

pub use dr::{dr_proxy, refine, split_cap, DrOutcome, DrParams};

/// History schema version written in every record.
pub const RECORD_VERSION: u32 = 1;

/// Turns a stage's elapsed wall time and search effort into seconds.
pub trait Clock {
    fn seconds(&self, elapsed: Duration, work: u64) -> f64;
}

/// Real elapsed time.
#[derive(Clone, Copy, Debug, Default)]
pub struct WallClock;

impl Clock for WallClock {
    fn seconds(&self, elapsed: Duration, _work: u64) -> f64 {
        elapsed.as_secs_f64()
    }
}

/// Deterministic stand-in: a fixed price per unit of search effort.
#[derive(Clone, Copy, Debug)]
pub struct WorkClock {
    pub seconds_per_unit: f64,
}

impl Default for WorkClock {
    fn default() -> Self {
        Self { seconds_per_unit: 1e-6 }
    }
}

impl Clock for WorkClock {
    fn seconds(&self, _elapsed: Duration, work: u64) -> f64 {
        work as f64 * self.seconds_per_unit
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    BuildError,
    RunError,
    Infeasible,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::BuildError => "build-error",
            Status::RunError => "run-error",
            Status::Infeasible => "infeasible",
        })
    }
}

/// One line of `qor_history.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QorRecord {
    pub v: u32,
    pub iteration: u32,
    pub candidate_id: String,
    pub status: Status,
    pub repair_attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qor: Option<QorVector>,
    #[serde(default)]
    pub note: String,
}

impl QorRecord {
    pub fn failed(iteration: u32, candidate_id: String, status: Status, note: impl Into<String>) -> Self {
        Self { v: RECORD_VERSION, iteration, candidate_id, status, repair_attempts: 0, qor: None, note: note.into() }
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok && self.qor.is_some()
    }
}

/// A placed design: the coarse grid and its nets, pins fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    pub name: String,
    pub grid: GcellGrid,
    pub nets: Vec<Net>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    pub dr: DrParams,
    /// Ceiling on GR plus DR runtime as measured by the clock.
    pub time_limit_s: f64,
    /// Ceiling on the estimated routing memory.
    pub memory_limit_mb: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { dr: DrParams::default(), time_limit_s: 60.0, memory_limit_mb: 1024 }
    }
}

/// Rough bytes needed to evaluate `design`: both lattices with their
/// per-edge state plus the search buffers of the fine one.
pub fn memory_estimate(design: &GcellGrid, expansion: u32) -> u64 {
    let coarse = design.node_count() as u64;
    let fine = dr::fine_node_count(design, expansion);
    coarse * 40 + fine * 64
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

/// Evaluates one strategy document on `design`. Never fails; every outcome
/// is a record.
pub fn evaluate(doc: &str, design: &Design, iteration: u32, clock: &dyn Clock, opts: &EvalOptions) -> QorRecord {
    evaluate_with_routes(doc, design, iteration, clock, opts).record
}

/// A record plus the globally routed nets, when global routing finished.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub record: QorRecord,
    pub routed: Option<Vec<Net>>,
}

pub fn evaluate_with_routes(doc: &str, design: &Design, iteration: u32, clock: &dyn Clock, opts: &EvalOptions) -> Evaluation {
    let mut routed = None;
    let record = evaluate_into(doc, design, iteration, clock, opts, &mut routed);
    Evaluation { record, routed }
}

fn evaluate_into(
    doc: &str,
    design: &Design,
    iteration: u32,
    clock: &dyn Clock,
    opts: &EvalOptions,
    routed: &mut Option<Vec<Net>>,
) -> QorRecord {
    let id = content_id(doc.as_bytes());
    let strategy = match StrategyDoc::canonicalize(doc) {
        Ok((_, s)) => s,
        Err(e) => return QorRecord::failed(iteration, id, Status::BuildError, e.to_string()),
    };
    let need = memory_estimate(&design.grid, opts.dr.expansion);
    if need > opts.memory_limit_mb * 1024 * 1024 {
        let note = format!("memory estimate {} MiB exceeds limit {} MiB", need / (1024 * 1024), opts.memory_limit_mb);
        return QorRecord::failed(iteration, id, Status::RunError, note);
    }

    let mut grid = design.grid.clone();
    let mut nets = design.nets.clone();
    let started = Instant::now();
    let gr = panic::catch_unwind(AssertUnwindSafe(|| route_all(&strategy, &mut grid, &mut nets)));
    let stats = match gr {
        Ok(Ok(stats)) => stats,
        Ok(Err(e)) => return QorRecord::failed(iteration, id, Status::RunError, format!("global routing: {e}")),
        Err(p) => return QorRecord::failed(iteration, id, Status::RunError, format!("global routing panicked: {}", panic_message(p))),
    };
    let gr_rt = clock.seconds(started.elapsed(), stats.work);
    let mut qor = match metrics(&grid, &nets) {
        Ok(q) => q,
        Err(e) => return QorRecord::failed(iteration, id, Status::RunError, e.to_string()),
    };
    qor.gr_rt = gr_rt;
    *routed = Some(nets.clone());
    if gr_rt > opts.time_limit_s {
        let note = format!("global routing took {gr_rt:.3} s, limit {} s", opts.time_limit_s);
        return QorRecord::failed(iteration, id, Status::RunError, note);
    }

    let started = Instant::now();
    let dr = panic::catch_unwind(AssertUnwindSafe(|| dr_proxy(&strategy, &grid, &nets, opts.dr)));
    let dr = match dr {
        Ok(d) => d,
        Err(p) => return QorRecord::failed(iteration, id, Status::RunError, format!("detailed routing panicked: {}", panic_message(p))),
    };
    let dr_rt = clock.seconds(started.elapsed(), dr.work);
    if gr_rt + dr_rt > opts.time_limit_s {
        let note = format!("evaluation took {:.3} s, limit {} s", gr_rt + dr_rt, opts.time_limit_s);
        return QorRecord::failed(iteration, id, Status::RunError, note);
    }
    if !dr.feasible() {
        let note = format!(
            "detailed routing infeasible: {} unrouted, fine overflow {} (gr to {}, gr wl {})",
            dr.unrouted.len(),
            dr.overflow.total,
            qor.to,
            qor.gr_wl
        );
        return QorRecord::failed(iteration, id, Status::Infeasible, note);
    }
    qor.dr_wl = dr.wl;
    qor.dr_vc = dr.vc as f64;
    qor.dr_twl = dr.wl + dr.vc as f64;
    qor.dr_rt = dr_rt;
    QorRecord {
        v: RECORD_VERSION,
        iteration,
        candidate_id: id,
        status: Status::Ok,
        repair_attempts: 0,
        qor: Some(qor),
        note: String::new(),
    }
}
