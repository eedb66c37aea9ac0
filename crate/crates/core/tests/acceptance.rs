//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use routevolve::eval::{QorRecord, Status, RECORD_VERSION};
use routevolve::evolve::{resume, run_evolution, ClockKind, Control, EvolutionConfig, RunDir};
use routevolve::grid::{CapacityAdjustment, UNBOUNDED};
use routevolve::io::{emit_benchmark, generate, parse_benchmark, SynthParams};
use routevolve::mutate::{BrokenFirstAttempt, ScriptedProvider};
use routevolve::pareto::{delta, front, select, MetricKey, ObjectiveSpec, PLOT_KEYS};
use routevolve::router::{GridCandidate, PatternShape, PostPass, Router};
use routevolve::{route_all, Coord, Edge, EdgeKind, GcellGrid, GridSpec, LayerDir, Net, QorVector, RouterStrategy};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

// ---------------------------------------------------------------- 1

/// Two layers (H, V), random wire capacities and tile size.
fn random_grid(rng: &mut ChaCha8Rng) -> GcellGrid {
    let (nx, ny) = (rng.gen_range(2..=12), rng.gen_range(2..=12));
    let tile = (rng.gen_range(1..=3) as f64, rng.gen_range(1..=3) as f64);
    let spec =
        GridSpec { nx, ny, tile, layer_dirs: vec![LayerDir::Horizontal, LayerDir::Vertical], layer_caps: vec![2, 2], via_cap: UNBOUNDED };
    let mut adj = Vec::new();
    for y in 0..ny {
        for x in 0..nx {
            if x + 1 < nx {
                adj.push(CapacityAdjustment { from: Coord::new(x, y, 0), to: Coord::new(x + 1, y, 0), capacity: rng.gen_range(0..=2) });
            }
            if y + 1 < ny {
                adj.push(CapacityAdjustment { from: Coord::new(x, y, 1), to: Coord::new(x, y + 1, 1), capacity: rng.gen_range(0..=2) });
            }
        }
    }
    GcellGrid::with_adjustments(spec, &adj).unwrap()
}

/// Baseline cost on an empty grid, written out by hand: length, plus a
/// penalty of 10 where one more wire would exceed capacity.
fn hand_cost(g: &GcellGrid, e: &Edge) -> f64 {
    let (w, h) = g.tile();
    match e.kind {
        EdgeKind::Up => w.min(h),
        EdgeKind::East => w + if g.cap(e) == 0 { 10.0 } else { 0.0 },
        EdgeKind::North => h + if g.cap(e) == 0 { 10.0 } else { 0.0 },
    }
}

/// Dense Dijkstra over an adjacency list built from the grid dimensions.
fn dense_oracle(g: &GcellGrid, a: Coord, b: Coord) -> f64 {
    let (nx, ny) = (g.nx(), g.ny());
    let id = |c: Coord| ((c.layer * ny + c.y) * nx + c.x) as usize;
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); (nx * ny * 2) as usize];
    let mut link = |p: Coord, q: Coord, e: Edge| {
        let w = hand_cost(g, &e);
        adj[id(p)].push((id(q), w));
        adj[id(q)].push((id(p), w));
    };
    for y in 0..ny {
        for x in 0..nx {
            if x + 1 < nx {
                link(Coord::new(x, y, 0), Coord::new(x + 1, y, 0), Edge::new(x, y, 0, EdgeKind::East));
            }
            if y + 1 < ny {
                link(Coord::new(x, y, 1), Coord::new(x, y + 1, 1), Edge::new(x, y, 1, EdgeKind::North));
            }
            link(Coord::new(x, y, 0), Coord::new(x, y, 1), Edge::new(x, y, 0, EdgeKind::Up));
        }
    }
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[id(a)] = 0.0;
    heap.push((std::cmp::Reverse(0u64), id(a)));
    // Costs are integers here, so an integer key keeps the heap exact.
    while let Some((std::cmp::Reverse(d), u)) = heap.pop() {
        if d as f64 > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d as f64 + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push((std::cmp::Reverse(nd as u64), v));
            }
        }
    }
    dist[id(b)]
}

fn path_connects(edges: &[Edge], a: Coord, b: Coord) -> bool {
    let mut adj: BTreeMap<Coord, Vec<Coord>> = BTreeMap::new();
    for e in edges {
        adj.entry(e.low()).or_default().push(e.high());
        adj.entry(e.high()).or_default().push(e.low());
    }
    let mut seen = BTreeSet::from([a]);
    let mut stack = vec![a];
    while let Some(u) = stack.pop() {
        for &v in adj.get(&u).into_iter().flatten() {
            if seen.insert(v) {
                stack.push(v);
            }
        }
    }
    seen.contains(&b)
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let strategy = RouterStrategy::baseline();
    for case in 0..50 {
        let g = random_grid(&mut rng);
        let pick = |rng: &mut ChaCha8Rng| Coord::new(rng.gen_range(0..g.nx()), rng.gen_range(0..g.ny()), rng.gen_range(0..2));
        let (a, b) = (pick(&mut rng), pick(&mut rng));
        let mut r = Router::new(&strategy, &g, &[]).unwrap();
        let got = r.maze_route(&g, a, b, GridCandidate::FULL, a.manhattan(&b), &BTreeSet::new()).ok_or(format!("case {case}: no route"))?;
        let want = dense_oracle(&g, a, b);
        check(got.cost == want, || format!("case {case}: maze {} vs oracle {want}", got.cost))?;
        let priced: f64 = got.edges.iter().map(|e| hand_cost(&g, e)).sum();
        check(priced == want, || format!("case {case}: path prices to {priced}, oracle {want}"))?;
        check(a == b || path_connects(&got.edges, a, b), || format!("case {case}: path does not connect"))?;
    }
    let t = started.elapsed();
    check(t < Duration::from_secs(10), || format!("took {t:?}"))?;
    Ok(format!("50 grids, exact cost match, {:.2} s", t.as_secs_f64()))
}

// ---------------------------------------------------------------- 2

fn random_qor(rng: &mut ChaCha8Rng) -> QorVector {
    // Small integer ranges force ties and duplicates.
    QorVector {
        dr_wl: rng.gen_range(90..110) as f64,
        dr_vc: rng.gen_range(0..5) as f64,
        gr_rt: rng.gen_range(1..20) as f64 / 4.0,
        gr_wl: rng.gen_range(80..100) as f64,
        ..QorVector::default()
    }
}

fn record(iteration: u32, status: Status, qor: QorVector) -> QorRecord {
    QorRecord {
        v: RECORD_VERSION,
        iteration,
        candidate_id: format!("{iteration:064x}"),
        status,
        repair_attempts: 0,
        qor: (status == Status::Ok).then_some(qor),
        note: String::new(),
    }
}

fn pairwise_dominates(a: &QorVector, b: &QorVector, keys: &[MetricKey]) -> bool {
    let vals = |q: &QorVector| keys.iter().map(|k| k.get(q)).collect::<Vec<_>>();
    let (va, vb) = (vals(a), vals(b));
    va.iter().zip(&vb).all(|(x, y)| x <= y) && va.iter().zip(&vb).any(|(x, y)| x < y)
}

/// The rule restated as filter + sort.
fn select_oracle(records: &[QorRecord], base: &QorVector) -> u32 {
    let mut ok: Vec<(u32, QorVector)> = records.iter().filter(|r| r.status == Status::Ok).map(|r| (r.iteration, r.qor.unwrap())).collect();
    let key = |q: &QorVector| (q.dr_wl, q.dr_vc, q.gr_rt);
    let both: Vec<(u32, QorVector)> = ok.iter().copied().filter(|(_, q)| q.dr_wl < base.dr_wl && q.gr_rt < base.gr_rt).collect();
    let mut pool = if both.is_empty() { std::mem::take(&mut ok) } else { both };
    pool.sort_by(|a, b| key(&a.1).partial_cmp(&key(&b.1)).unwrap().then(a.0.cmp(&b.0)));
    pool[0].0
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let records: Vec<QorRecord> = (0..500).map(|i| record(i, Status::Ok, random_qor(&mut rng))).collect();
    for keys in [&PLOT_KEYS[..], ObjectiveSpec::default().keys()] {
        let got: Vec<u32> = front(&records, keys).iter().map(|r| r.iteration).collect();
        let want: Vec<u32> = records
            .iter()
            .filter(|r| !records.iter().any(|o| pairwise_dominates(o.qor.as_ref().unwrap(), r.qor.as_ref().unwrap(), keys)))
            .map(|r| r.iteration)
            .collect();
        check(got == want, || format!("front over {keys:?}: {} members vs oracle {}", got.len(), want.len()))?;
    }
    let spec = ObjectiveSpec::default();
    for h in 0..50 {
        let n = rng.gen_range(1..40);
        let statuses = [Status::Ok, Status::Ok, Status::Ok, Status::BuildError, Status::Infeasible, Status::RunError];
        let history: Vec<QorRecord> = (0..n)
            .map(|i| record(i, if i == 0 { Status::Ok } else { statuses[rng.gen_range(0..statuses.len())] }, random_qor(&mut rng)))
            .collect();
        let got = select(&history, &history[0], &spec).map_err(|e| e.to_string())?.iteration;
        let want = select_oracle(&history, history[0].qor.as_ref().unwrap());
        check(got == want, || format!("history {h}: select {got}, oracle {want}"))?;
    }
    Ok("500-point fronts and 50 selections match".into())
}

// ---------------------------------------------------------------- 3

fn random_nets(rng: &mut ChaCha8Rng, g: &GcellGrid, count: usize) -> Vec<Net> {
    (0..count)
        .map(|i| {
            let pins = (0..rng.gen_range(2..=4))
                .map(|_| Coord::new(rng.gen_range(0..g.nx()), rng.gen_range(0..g.ny()), rng.gen_range(0..g.layers())))
                .collect();
            Net::new(format!("n{i}"), pins)
        })
        .collect()
}

fn random_strategy(rng: &mut ChaCha8Rng) -> RouterStrategy {
    let mut s = RouterStrategy::baseline();
    s.patterns = PatternShape::ALL.into_iter().filter(|_| rng.gen_bool(0.6)).collect();
    if s.patterns.is_empty() {
        s.patterns.insert(PatternShape::L);
    }
    if rng.gen_bool(0.5) {
        s.grid_candidates.push(GridCandidate::new(rng.gen_range(2..6), rng.gen_range(0..2), rng.gen_range(0..2)));
    }
    if rng.gen_bool(0.5) {
        s.post_passes.push(PostPass::Pulse { top_fraction: 0.3 });
    }
    if rng.gen_bool(0.3) {
        s.post_passes.push(PostPass::Rebalance);
    }
    s.soft_reserve = [0.0, 0.1][rng.gen_range(0..2)];
    s.rrr_max_rounds = rng.gen_range(1..6);
    s.seed = rng.gen();
    s
}

/// Recounts demand from the routes themselves and derives every metric.
fn recount(g: &GcellGrid, nets: &[Net]) -> (u64, u64, f64, f64) {
    let mut demand: BTreeMap<Edge, u64> = BTreeMap::new();
    let (mut wl, mut vc) = (0.0, 0.0);
    let (w, h) = g.tile();
    for n in nets {
        for e in &n.route.as_ref().unwrap().edges {
            *demand.entry(*e).or_default() += 1;
            match e.kind {
                EdgeKind::East => wl += w,
                EdgeKind::North => wl += h,
                EdgeKind::Up => vc += 1.0,
            }
        }
    }
    let (mut mo, mut to) = (0, 0);
    for (e, d) in &demand {
        let cap = g.cap(e) as u64;
        let x = d.saturating_sub(cap);
        mo = mo.max(x);
        to += x;
    }
    (mo, to, wl, vc)
}

fn twl_holds(q: &QorVector) -> bool {
    let ok = |twl: f64, sum: f64| (twl - sum).abs() <= 1e-9 * sum.abs().max(1.0);
    ok(q.gr_twl, q.gr_wl + q.gr_vc) && ok(q.dr_twl, q.dr_wl + q.dr_vc)
}

fn criterion_3(run_records: &[QorRecord]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..100 {
        let mut g = random_grid(&mut rng);
        let count = rng.gen_range(1..12);
        let mut nets = random_nets(&mut rng, &g, count);
        let s = random_strategy(&mut rng);
        route_all(&s, &mut g, &mut nets).map_err(|e| format!("case {case}: {e}"))?;
        let q = routevolve::grid::metrics(&g, &nets).map_err(|e| e.to_string())?;
        let (mo, to, wl, vc) = recount(&g, &nets);
        check((q.mo, q.to, q.gr_wl, q.gr_vc) == (mo, to, wl, vc), || {
            format!("case {case}: metrics {:?} vs recount {:?}", (q.mo, q.to, q.gr_wl, q.gr_vc), (mo, to, wl, vc))
        })?;
        let ov = g.overflow();
        check((ov.max, ov.total) == (mo, to), || format!("case {case}: grid overflow {ov:?} vs recount ({mo}, {to})"))?;
        check(twl_holds(&q), || format!("case {case}: twl"))?;
    }
    let mut checked = 0;
    for r in run_records {
        if let Some(q) = &r.qor {
            check(twl_holds(q), || format!("record {} of a run breaks TWL = WL + VC", r.iteration))?;
            checked += 1;
        }
    }
    check(checked > 0, || "no emitted records to check".into())?;
    Ok(format!("100 routed states recount exactly; TWL holds in {checked} emitted records"))
}

// ---------------------------------------------------------------- 4, 5

fn config(design: &Path, run_dir: PathBuf, iterations: u32, seed: u64) -> EvolutionConfig {
    let mut c = EvolutionConfig::new(design, run_dir);
    c.max_iterations = iterations;
    c.seed = seed;
    c.eval.clock = ClockKind::Work;
    c
}

struct SeedRun {
    seed: u64,
    baseline: f64,
    selected: f64,
    secs: f64,
    records: Vec<QorRecord>,
}

fn seeded_runs(tmp: &Path) -> Result<Vec<SeedRun>, String> {
    let design = fixture("congested16.gr");
    (0..20)
        .map(|seed| {
            let c = config(&design, tmp.join(format!("c45-{seed}")), 30, seed);
            let t = Instant::now();
            let s = run_evolution(&c, &mut ScriptedProvider::new(seed), Control::default()).map_err(|e| e.to_string())?;
            let secs = t.elapsed().as_secs_f64();
            let records = RunDir::open(&c.run_dir).and_then(|d| d.history()).map_err(|e| e.to_string())?;
            let baseline = records[0].qor.ok_or("baseline without qor")?.dr_wl;
            let selected = s.selected.qor.ok_or("selection without qor")?.dr_wl;
            Ok(SeedRun { seed, baseline, selected, secs, records })
        })
        .collect()
}

fn criterion_4(runs: &[SeedRun]) -> Outcome {
    for r in runs {
        check(r.records.len() == 31, || format!("seed {}: {} records", r.seed, r.records.len()))?;
        check(r.selected <= r.baseline, || format!("seed {}: selected {} > baseline {}", r.seed, r.selected, r.baseline))?;
        check(r.secs < 60.0, || format!("seed {}: {:.1} s", r.seed, r.secs))?;
    }
    let slowest = runs.iter().map(|r| r.secs).fold(0.0, f64::max);
    Ok(format!("20 runs x 30 iterations, selected <= baseline in all, slowest {slowest:.1} s"))
}

fn criterion_5(runs: &[SeedRun]) -> Outcome {
    let improved = runs.iter().filter(|r| r.selected < r.baseline).count();
    let best = runs.iter().map(|r| (r.baseline - r.selected) / r.baseline * 100.0).fold(0.0, f64::max);
    check(improved >= 15, || format!("only {improved}/20 runs improved"))?;
    Ok(format!("{improved}/20 runs strictly improved dr-wl (best {best:.2} %)"))
}

// ---------------------------------------------------------------- 6

fn criterion_6(tmp: &Path) -> Outcome {
    let design = fixture("congested16.gr");
    let full = config(&design, tmp.join("c6-full"), 20, 6);
    run_evolution(&full, &mut ScriptedProvider::new(6), Control::default()).map_err(|e| e.to_string())?;
    let want = std::fs::read(full.run_dir.join("qor_history.jsonl")).map_err(|e| e.to_string())?;
    for k in [1, 7, 15] {
        let c = config(&design, tmp.join(format!("c6-cut{k}")), 20, 6);
        let stop = Control { stop_after: Some(k), observer: None };
        run_evolution(&c, &mut ScriptedProvider::new(6), stop).map_err(|e| e.to_string())?;
        // A fresh provider: nothing survives the interruption but the directory.
        resume(&c.run_dir, &mut ScriptedProvider::new(6), Control::default()).map_err(|e| e.to_string())?;
        let got = std::fs::read(c.run_dir.join("qor_history.jsonl")).map_err(|e| e.to_string())?;
        check(got == want, || format!("k = {k}: resumed history differs"))?;
    }
    Ok("k = 1, 7, 15: resumed history byte-identical".into())
}

// ---------------------------------------------------------------- 7

fn criterion_7(tmp: &Path) -> Outcome {
    // Ample capacity: every scripted candidate is routable.
    let p = SynthParams { name: "roomy".into(), nx: 10, ny: 10, capacity: 12, nets: 30, band: None, seed: 77, ..SynthParams::congested() };
    let design = tmp.join("roomy.gr");
    std::fs::write(&design, emit_benchmark(&generate(&p))).map_err(|e| e.to_string())?;
    let mut c = config(&design, tmp.join("c7"), 10, 7);
    c.repair_budget = 3;
    run_evolution(&c, &mut BrokenFirstAttempt(ScriptedProvider::new(7)), Control::default()).map_err(|e| e.to_string())?;
    let h = RunDir::open(&c.run_dir).and_then(|d| d.history()).map_err(|e| e.to_string())?;
    for r in &h[1..] {
        check(r.status == Status::Ok && r.repair_attempts == 1, || {
            format!("iteration {}: status {}, repair_attempts {}", r.iteration, r.status, r.repair_attempts)
        })?;
    }
    Ok(format!("{} iterations repaired once each, all ok", h.len() - 1))
}

// ---------------------------------------------------------------- 8

fn criterion_8(tmp: &Path) -> Outcome {
    let design = fixture("congested16.gr");
    let mut seen = Vec::new();
    for name in ["c8-a", "c8-b"] {
        let c = config(&design, tmp.join(name), 20, 8);
        run_evolution(&c, &mut ScriptedProvider::new(8), Control::default()).map_err(|e| e.to_string())?;
        let dir = RunDir::open(&c.run_dir).map_err(|e| e.to_string())?;
        let history = std::fs::read(c.run_dir.join("qor_history.jsonl")).map_err(|e| e.to_string())?;
        let log = std::fs::read(c.run_dir.join("store/log")).map_err(|e| e.to_string())?;
        seen.push((dir.object_ids().map_err(|e| e.to_string())?, history, log));
    }
    check(seen[0] == seen[1], || "runs differ".into())?;
    Ok(format!("{} store objects and history bytes identical", seen[0].0.len()))
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..1000 {
        let b: f64 = rng.gen_range(1e-3..1e6);
        let o: f64 = if i % 10 == 0 { b } else { rng.gen_range(1e-3..2e6) };
        let d = delta(b, o).map_err(|e| e.to_string())?;
        check(d == (b - o) / b * 100.0, || format!("delta({b}, {o}) = {d}"))?;
        check((o < b) == (d > 0.0), || format!("sign of delta({b}, {o})"))?;
    }
    check(delta(100.0, 98.0) == Ok(2.0) && delta(100.0, 100.0) == Ok(0.0), || "worked examples".into())?;
    check(delta(0.0, 1.0).is_err(), || "zero baseline accepted".into())?;
    Ok("1000 pairs exact, sign convention holds".into())
}

// ---------------------------------------------------------------- 10

fn seed_texts() -> Vec<Vec<u8>> {
    let mut out = vec![std::fs::read(fixture("minimal.gr")).unwrap()];
    for seed in 0..3 {
        let p = SynthParams { nx: 5, ny: 4, nets: 4, band: Some((1, 3, 1)), seed, ..SynthParams::congested() };
        out.push(emit_benchmark(&generate(&p)).into_bytes());
    }
    out
}

const TOKENS: [&[u8]; 12] = [b"0", b"-1", b"99999999999", b"\n", b" ", b"grid", b"num net", b"1.5", b"x", b"\t", b"4294967296", b"\r\n"];

fn mutate(rng: &mut ChaCha8Rng, seed: &[u8]) -> Vec<u8> {
    let mut b = seed.to_vec();
    for _ in 0..rng.gen_range(1..8) {
        if b.is_empty() {
            b.extend_from_slice(TOKENS[rng.gen_range(0..TOKENS.len())]);
            continue;
        }
        let i = rng.gen_range(0..b.len());
        match rng.gen_range(0..6) {
            0 => b[i] = rng.gen(),
            1 => {
                b.remove(i);
            }
            2 => {
                let t = TOKENS[rng.gen_range(0..TOKENS.len())];
                b.splice(i..i, t.iter().copied());
            }
            3 => {
                let j = (i + rng.gen_range(1..40)).min(b.len());
                b.drain(i..j);
            }
            4 => {
                let j = (i + rng.gen_range(1..40)).min(b.len());
                let chunk = b[i..j].to_vec();
                b.splice(i..i, chunk);
            }
            _ => b.truncate(i),
        }
    }
    b
}

fn criterion_10() -> Outcome {
    let started = Instant::now();
    let seeds = seed_texts();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut accepted, mut rejected) = (0u64, 0u64);
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failure = None;
    for i in 0..1_000_000u64 {
        let bytes = mutate(&mut rng, &seeds[(i % seeds.len() as u64) as usize]);
        let text = String::from_utf8_lossy(&bytes);
        match std::panic::catch_unwind(|| parse_benchmark(&text)) {
            Ok(Ok(_)) => accepted += 1,
            Ok(Err(e)) if e.line >= 1 && e.col >= 1 => rejected += 1,
            Ok(Err(e)) => {
                failure = Some(format!("input {i}: unlocated error {e:?}"));
                break;
            }
            Err(_) => {
                failure = Some(format!("input {i}: parser panicked on {:?}", text));
                break;
            }
        }
    }
    std::panic::set_hook(hook);
    if let Some(f) = failure {
        return Err(f);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..200 {
        let p = SynthParams {
            name: String::new(),
            nx: rng.gen_range(1..30),
            ny: rng.gen_range(1..30),
            layers: rng.gen_range(1..7),
            capacity: rng.gen_range(0..20),
            tile: rng.gen_range(1..50),
            nets: rng.gen_range(0..60),
            long_fraction: rng.gen_range(0.0..1.0),
            band: None,
            seed: rng.gen(),
        };
        let p = SynthParams { band: (p.nx > 3).then(|| (1, p.nx - 1, rng.gen_range(0..3))), ..p };
        let b = generate(&p);
        let again = parse_benchmark(&emit_benchmark(&b)).map_err(|e| format!("case {case}: {e}"))?;
        check(again == b, || format!("case {case}: round trip changed the benchmark"))?;
    }
    Ok(format!(
        "10^6 mutated inputs: {accepted} parsed, {rejected} located errors, 0 crashes; 200 round trips ({:.1} s)",
        started.elapsed().as_secs_f64()
    ))
}

// ----------------------------------------------------------------

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let runs = seeded_runs(tmp.path());
    let run_records: Vec<QorRecord> = runs.iter().flatten().flat_map(|r| r.records.clone()).collect();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "maze matches dense shortest path", criterion_1()),
        (2, "Pareto front and selection oracles", criterion_2()),
        (3, "overflow and metrics recount, TWL", criterion_3(&run_records)),
        (4, "selection never worse than baseline", runs.as_ref().map_err(Clone::clone).and_then(|r| criterion_4(r))),
        (5, "end-to-end improvement", runs.as_ref().map_err(Clone::clone).and_then(|r| criterion_5(r))),
        (6, "interrupt and resume", criterion_6(tmp.path())),
        (7, "self-repair", criterion_7(tmp.path())),
        (8, "determinism", criterion_8(tmp.path())),
        (9, "delta convention", criterion_9()),
        (10, "parser robustness", criterion_10()),
    ];
    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 10 acceptance criteria passed");
}
