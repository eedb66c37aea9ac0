// SPDX-License-Identifier: Apache-2.0

//! `routevolve`: route a benchmark, run or resume an evolution, and inspect
//! a run directory.
//!
//! Exit codes: 0 success, 1 usage/config/parse error, 2 infeasible result.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

use routevolve::eval::{evaluate_with_routes, EvalOptions, QorRecord, Status, WallClock};
use routevolve::evolve::{self, incumbent, Control, EvolutionConfig, RunDir};
use routevolve::io::{emit_guides, load_benchmark};
use routevolve::report::{plot_csv, plot_data, plot_svg, report_csv, report_rows};
use routevolve::StrategyDoc;

#[derive(Parser)]
#[command(name = "routevolve", version, about = "Evolvable global router and strategy search")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Route a benchmark with one strategy; write guides and print QoR.
    Route {
        #[arg(long)]
        benchmark: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Start an evolution run described by a config file.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        /// Validate the config and evaluate the baseline only.
        #[arg(long)]
        dry_run: bool,
    },
    /// Continue an interrupted run.
    Resume {
        #[arg(long)]
        run: PathBuf,
    },
    /// Print the selected candidate id and write it to DIR/selected.strategy.
    Select {
        #[arg(long)]
        run: PathBuf,
    },
    /// Print the per-candidate report table (CSV).
    Report {
        #[arg(long)]
        run: PathBuf,
    },
    /// Write an SVG of detailed wirelength against GR runtime plus a CSV sidecar.
    Plot {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay the run into a new git repository.
    Export {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: 1, error: e.into() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn status_line(r: &QorRecord) -> String {
    let (wl, rt) = r.qor.map_or(("-".to_string(), "-".to_string()), |q| (q.dr_wl.to_string(), format!("{:.6}", q.gr_rt)));
    format!("{:>4} {} {:<11} dr-wl {wl} gr-rt {rt}", r.iteration, &r.candidate_id[..12], r.status.to_string())
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Route { benchmark, strategy, out } => route(&benchmark, &strategy, &out),
        Cmd::Evolve { config, dry_run } => {
            let cfg = EvolutionConfig::load(&config)?;
            if dry_run {
                let r = evolve::dry_run(&cfg)?;
                println!("{}", status_line(&r));
                println!("config ok; baseline evaluated; nothing written");
                return Ok(());
            }
            let mut provider = cfg.provider()?;
            let mut print = |r: &QorRecord| println!("{}", status_line(r));
            let s = evolve::run_evolution(&cfg, provider.as_mut(), Control { stop_after: None, observer: Some(&mut print) })?;
            println!("selected {} (iteration {})", s.selected.candidate_id, s.selected.iteration);
            Ok(())
        }
        Cmd::Resume { run } => {
            let cfg = RunDir::open(&run)?.config()?;
            let mut provider = cfg.provider()?;
            let mut print = |r: &QorRecord| println!("{}", status_line(r));
            let s = evolve::resume(&run, provider.as_mut(), Control { stop_after: None, observer: Some(&mut print) })?;
            if s.completed {
                println!("run complete at iteration {}", s.last_iteration);
            }
            println!("selected {} (iteration {})", s.selected.candidate_id, s.selected.iteration);
            Ok(())
        }
        Cmd::Select { run } => {
            let dir = RunDir::open(&run)?;
            let history = dir.history()?;
            let selected = incumbent(&history, &dir.config()?.objectives)?;
            let doc = dir.object(&selected.candidate_id)?;
            let path = run.join("selected.strategy");
            fs::write(&path, &doc).with_context(|| path.display().to_string())?;
            println!("{}", selected.candidate_id);
            Ok(())
        }
        Cmd::Report { run } => {
            let dir = RunDir::open(&run)?;
            print!("{}", report_csv(&report_rows(&dir)?));
            Ok(())
        }
        Cmd::Plot { run, out } => {
            let dir = RunDir::open(&run)?;
            let data = plot_data(&dir)?;
            let title = dir.config()?.design.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            fs::write(&out, plot_svg(&data, &title)).with_context(|| out.display().to_string())?;
            let sidecar = out.with_extension("csv");
            fs::write(&sidecar, plot_csv(&data)).with_context(|| sidecar.display().to_string())?;
            println!("wrote {} and {}", out.display(), sidecar.display());
            Ok(())
        }
        Cmd::Export { run, out } => {
            let n = evolve::export_git(&RunDir::open(&run)?, &out)?;
            println!("exported {n} commits to {}", out.display());
            Ok(())
        }
    }
}

fn route(benchmark: &Path, strategy: &Path, out: &Path) -> Result<(), Failure> {
    let bench = load_benchmark(benchmark).map_err(|e| anyhow!(e))?;
    let design = bench.to_design().with_context(|| benchmark.display().to_string())?;
    let text = fs::read_to_string(strategy).with_context(|| strategy.display().to_string())?;
    let (doc, _) = StrategyDoc::canonicalize(&text).with_context(|| strategy.display().to_string())?;
    let eval = evaluate_with_routes(doc.text(), &design, 0, &WallClock, &EvalOptions::default());
    if let Some(nets) = &eval.routed {
        fs::create_dir_all(out).with_context(|| out.display().to_string())?;
        let path = out.join(format!("{}.guide", design.name));
        let guides = emit_guides(nets).map_err(|e| anyhow!(e))?;
        fs::write(&path, guides).with_context(|| path.display().to_string())?;
    }
    let r = &eval.record;
    match (r.status, r.qor) {
        (Status::Ok, Some(q)) => {
            println!("{}", serde_json::to_string_pretty(&q).expect("serializes"));
            Ok(())
        }
        (Status::Infeasible, _) => Err(Failure { code: 2, error: anyhow!("infeasible: {}", r.note) }),
        _ => Err(Failure { code: 1, error: anyhow!("{}: {}", r.status, r.note) }),
    }
}
