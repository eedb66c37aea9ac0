use std::fs;
use std::path::{Path, PathBuf};

use super::*;
use crate::io::{emit_benchmark, generate, SynthParams};
use crate::mutate::{BrokenFirstAttempt, MutationError, Proposal, ScriptedProvider};

fn small_design(dir: &Path) -> PathBuf {
    let p = SynthParams { name: "small".into(), nx: 8, ny: 8, nets: 20, band: Some((3, 5, 2)), seed: 11, ..SynthParams::congested() };
    let path = dir.join("small.gr");
    fs::write(&path, emit_benchmark(&generate(&p))).unwrap();
    path
}

fn config(dir: &Path, run: &str, iterations: u32) -> EvolutionConfig {
    let mut c = EvolutionConfig::new(small_design(dir), dir.join(run));
    c.max_iterations = iterations;
    c.seed = 5;
    c.eval.clock = ClockKind::Work;
    c
}

fn run(c: &EvolutionConfig) -> RunSummary {
    run_evolution(c, &mut ScriptedProvider::new(c.seed), Control::default()).unwrap()
}

fn history_bytes(root: &Path) -> String {
    fs::read_to_string(root.join(store::HISTORY)).unwrap()
}

#[test]
fn toml_defaults_and_relative_paths() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("evolve.toml");
    fs::write(&path, "design = \"bench/a.gr\"\nrun_dir = \"runs/one\"\n").unwrap();
    let c = EvolutionConfig::load(&path).unwrap();
    assert_eq!(c.max_iterations, 75);
    assert_eq!(c.repair_budget, 3);
    assert_eq!(c.objectives, ObjectiveSpec::default());
    assert_eq!(c.provider, ProviderConfig::Scripted);
    assert!(c.design.is_absolute() && c.design.ends_with("bench/a.gr"));
    assert_eq!(EvolutionConfig::from_toml(&c.to_toml()).unwrap(), c);
}

#[test]
fn toml_full_schema_parses() {
    let text = r#"
design = "d.gr"
run_dir = "r"
max_iterations = 25
repair_budget = 1
seed = 9
objectives = ["dr-wl", "gr-rt"]

[eval]
clock = "work"
time_limit_s = 5
dr_slack = 2

[provider]
kind = "http"
url = "http://localhost:9/"

[warm_start]
run = "../small-run"
"#;
    let c = EvolutionConfig::from_toml(text).unwrap();
    assert_eq!(c.eval.clock, ClockKind::Work);
    assert_eq!(c.eval.dr_slack, 2);
    assert_eq!(c.eval.dr_expansion, 2);
    assert!(matches!(&c.provider, ProviderConfig::Http { token_env, .. } if token_env == "ROUTEVOLVE_TOKEN"));
    assert_eq!(c.warm_start.as_ref().unwrap().candidate, None);
    assert_eq!(EvolutionConfig::from_toml(&c.to_toml()).unwrap(), c);
}

#[test]
fn bad_configs_are_rejected() {
    for text in [
        "design = \"d\"\nrun_dir = \"r\"\ntypo = 1\n",
        "design = \"d\"\n",
        "design = \"d\"\nrun_dir = \"r\"\nobjectives = [\"dr-wl\", \"dr-wl\"]\n",
        "design = \"d\"\nrun_dir = \"r\"\n[provider]\nkind = \"command\"\ncommand = []\n",
        "design = \"d\"\nrun_dir = \"r\"\n[eval]\ntime_limit_s = 0\n",
    ] {
        assert!(matches!(EvolutionConfig::from_toml(text), Err(EvolveError::Config(_))), "{text}");
    }
}

#[test]
fn zero_iterations_keeps_only_the_baseline() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), "run", 0);
    let s = run(&c);
    assert!(s.completed);
    let h = RunDir::open(&c.run_dir).unwrap().history().unwrap();
    assert_eq!(h.len(), 1);
    assert_eq!(h[0].candidate_id, StrategyDoc::baseline().id());
    assert_eq!(s.selected, h[0]);
    assert!(!c.run_dir.join(store::LOCK).exists());
}

#[test]
fn runs_are_deterministic_and_the_store_is_closed() {
    let tmp = tempfile::tempdir().unwrap();
    let a = config(tmp.path(), "a", 6);
    let mut b = a.clone();
    b.run_dir = tmp.path().join("b");
    run(&a);
    run(&b);
    assert_eq!(history_bytes(&a.run_dir), history_bytes(&b.run_dir));
    let (da, db) = (RunDir::open(&a.run_dir).unwrap(), RunDir::open(&b.run_dir).unwrap());
    assert_eq!(da.object_ids().unwrap(), db.object_ids().unwrap());

    let history = da.history().unwrap();
    assert_eq!(history.len(), 7);
    let log = da.version_log(u32::MAX).unwrap();
    assert_eq!(log.len(), history.len());
    for (e, r) in log.iter().zip(&history) {
        assert_eq!(e.candidate_id, r.candidate_id);
        da.object(&r.candidate_id).unwrap();
        if let Some(p) = &e.parent_id {
            da.object(p).unwrap();
            assert!(log.iter().any(|x| &x.candidate_id == p && x.iteration < e.iteration));
        }
    }
    assert!(log[0].parent_id.is_none());
}

#[test]
fn resume_after_interrupt_matches_uninterrupted() {
    let tmp = tempfile::tempdir().unwrap();
    let full = config(tmp.path(), "full", 5);
    run(&full);
    for k in [0, 2, 4] {
        let mut c = full.clone();
        c.run_dir = tmp.path().join(format!("cut{k}"));
        let s = run_evolution(&c, &mut ScriptedProvider::new(c.seed), Control { stop_after: Some(k), observer: None }).unwrap();
        assert_eq!((s.last_iteration, s.completed), (k, false));
        let s = resume(&c.run_dir, &mut ScriptedProvider::new(c.seed), Control::default()).unwrap();
        assert!(s.completed);
        assert_eq!(history_bytes(&c.run_dir), history_bytes(&full.run_dir), "k = {k}");
    }
}

#[test]
fn resume_of_a_completed_run_is_a_no_op() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), "run", 2);
    run(&c);
    let before = history_bytes(&c.run_dir);
    let mut seen = 0;
    let mut count = |_: &QorRecord| seen += 1;
    let s = resume(&c.run_dir, &mut ScriptedProvider::new(0), Control { stop_after: None, observer: Some(&mut count) }).unwrap();
    assert!(s.completed);
    assert_eq!(seen, 0);
    assert_eq!(history_bytes(&c.run_dir), before);
}

#[test]
fn uncommitted_log_tail_is_discarded() {
    let tmp = tempfile::tempdir().unwrap();
    let full = config(tmp.path(), "full", 3);
    run(&full);
    let mut c = full.clone();
    c.run_dir = tmp.path().join("cut");
    run_evolution(&c, &mut ScriptedProvider::new(c.seed), Control { stop_after: Some(1), observer: None }).unwrap();
    let log = c.run_dir.join("store/log");
    let mut text = fs::read_to_string(&log).unwrap();
    text.push_str("2\tdeadbeef\t-\t0\tcrashed before the history line\n3\tpartial");
    fs::write(&log, text).unwrap();
    resume(&c.run_dir, &mut ScriptedProvider::new(c.seed), Control::default()).unwrap();
    assert_eq!(fs::read_to_string(&log).unwrap(), fs::read_to_string(full.run_dir.join("store/log")).unwrap());
}

#[test]
fn corrupted_history_names_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), "run", 3);
    run_evolution(&c, &mut ScriptedProvider::new(c.seed), Control { stop_after: Some(2), observer: None }).unwrap();
    let path = c.run_dir.join(store::HISTORY);
    let text = history_bytes(&c.run_dir);
    let cut = text.len() - 10;
    fs::write(&path, &text[..cut]).unwrap();
    let err = resume(&c.run_dir, &mut ScriptedProvider::new(0), Control::default()).unwrap_err();
    assert!(matches!(err, EvolveError::History { line: 3, .. }), "{err}");
    // No silent repair.
    assert_eq!(fs::read_to_string(&path).unwrap(), &text[..cut]);

    let lines: Vec<&str> = text.lines().collect();
    fs::write(&path, format!("{}\n{}\n", lines[0], lines[2])).unwrap();
    let err = resume(&c.run_dir, &mut ScriptedProvider::new(0), Control::default()).unwrap_err();
    assert!(matches!(err, EvolveError::History { line: 2, .. }), "{err}");
}

#[test]
fn one_writer_at_a_time() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), "run", 1);
    run_evolution(&c, &mut ScriptedProvider::new(c.seed), Control { stop_after: Some(0), observer: None }).unwrap();
    let held = RunWriter::attach(&c.run_dir).unwrap();
    let err = resume(&c.run_dir, &mut ScriptedProvider::new(c.seed), Control::default()).unwrap_err();
    assert!(matches!(err, EvolveError::Locked(_)));
    // Readers may attach while the lock is held.
    assert_eq!(RunDir::open(&c.run_dir).unwrap().history().unwrap().len(), 1);
    drop(held);
    assert!(resume(&c.run_dir, &mut ScriptedProvider::new(c.seed), Control::default()).unwrap().completed);
    assert!(run_evolution(&c, &mut ScriptedProvider::new(c.seed), Control::default()).is_err());
}

#[test]
fn a_broken_first_attempt_is_repaired_in_the_same_iteration() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), "run", 4);
    run_evolution(&c, &mut BrokenFirstAttempt(ScriptedProvider::new(c.seed)), Control::default()).unwrap();
    let h = RunDir::open(&c.run_dir).unwrap().history().unwrap();
    assert_eq!(h.len(), 5);
    for r in &h[1..] {
        assert_eq!(r.repair_attempts, 1);
        assert_ne!(r.status, Status::BuildError);
    }
}

struct AlwaysFails(u32);

impl Provider for AlwaysFails {
    fn propose(&mut self, ctx: &MutationContext) -> Result<Proposal, MutationError> {
        assert_eq!(ctx.errors.len() as u32, ctx.attempt);
        self.0 += 1;
        Err(MutationError::Malformed("no patch".into()))
    }
}

#[test]
fn exhausted_budget_consumes_one_index() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(tmp.path(), "run", 2);
    c.repair_budget = 2;
    let mut p = AlwaysFails(0);
    let s = run_evolution(&c, &mut p, Control::default()).unwrap();
    assert_eq!(p.0, 6);
    let h = RunDir::open(&c.run_dir).unwrap().history().unwrap();
    assert_eq!(h.iter().map(|r| r.iteration).collect::<Vec<_>>(), [0, 1, 2]);
    for r in &h[1..] {
        assert_eq!((r.status, r.repair_attempts), (Status::BuildError, 2));
        assert!(r.qor.is_none());
        assert!(r.note.contains("no patch"));
    }
    assert_eq!(s.selected, h[0]);
}

#[test]
fn warm_start_copies_the_selected_candidate() {
    let tmp = tempfile::tempdir().unwrap();
    let src = config(tmp.path(), "src", 6);
    let s = run(&src);

    let mut warm = config(tmp.path(), "warm", 2);
    warm.warm_start = Some(WarmStart { run: src.run_dir.clone(), candidate: None });
    run(&warm);
    let h = RunDir::open(&warm.run_dir).unwrap().history().unwrap();
    assert_eq!(h[0].candidate_id, s.selected.candidate_id);
    // Re-evaluated on the target, not copied.
    assert_eq!(h[0].qor, s.selected.qor);
}

#[test]
fn warm_start_from_an_unimproved_run_equals_cold_start() {
    let tmp = tempfile::tempdir().unwrap();
    let src = config(tmp.path(), "src", 0);
    run(&src);
    let cold = config(tmp.path(), "cold", 3);
    run(&cold);
    let mut warm = cold.clone();
    warm.run_dir = tmp.path().join("warm");
    warm.warm_start = Some(WarmStart { run: src.run_dir.clone(), candidate: None });
    run(&warm);
    assert_eq!(history_bytes(&warm.run_dir), history_bytes(&cold.run_dir));
}

#[test]
fn infeasible_warm_start_falls_back_with_a_note() {
    let tmp = tempfile::tempdir().unwrap();
    let src = config(tmp.path(), "src", 0);
    run(&src);
    // Plant a candidate that reserves all capacity.
    let doc = StrategyDoc::baseline().text().replace("soft_reserve = 0", "soft_reserve = 1");
    let id = RunWriter::attach(&src.run_dir).unwrap().put_object(&doc).unwrap();
    let mut warm = config(tmp.path(), "warm", 0);
    warm.warm_start = Some(WarmStart { run: src.run_dir.clone(), candidate: Some(id) });
    let r = dry_run(&warm).unwrap();
    assert_eq!(r.candidate_id, StrategyDoc::baseline().id());
    assert!(r.note.contains("using the stock baseline"), "{}", r.note);
}

#[test]
fn dry_run_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), "run", 3);
    let r = dry_run(&c).unwrap();
    assert!(r.is_ok());
    assert!(!c.run_dir.exists());
    let mut bad = c.clone();
    bad.design = tmp.path().join("missing.gr");
    assert!(matches!(dry_run(&bad), Err(EvolveError::Config(_))));
}

#[test]
fn git_export_replays_every_iteration() {
    if std::process::Command::new("git").arg("--version").output().is_err() {
        eprintln!("git not installed; skipping");
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let c = config(tmp.path(), "run", 3);
    run(&c);
    let dest = tmp.path().join("repo");
    let n = export_git(&RunDir::open(&c.run_dir).unwrap(), &dest).unwrap();
    assert_eq!(n, 4);
    let out = std::process::Command::new("git").arg("-C").arg(&dest).args(["rev-list", "--count", "HEAD"]).output().unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "4");
    assert!(export_git(&RunDir::open(&c.run_dir).unwrap(), &dest).is_err());
}
