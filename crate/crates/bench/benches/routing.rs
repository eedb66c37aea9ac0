// SPDX-License-Identifier: Apache-2.0

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use routevolve::eval::{evaluate, EvalOptions, WorkClock};
use routevolve::io::parse_benchmark;
use routevolve::{route_all, StrategyDoc};
use routevolve_bench::{congested, large, RICH_STRATEGY};

fn routing(c: &mut Criterion) {
    for (name, (_, design)) in [("congested", congested()), ("large", large())] {
        for (label, text) in [("baseline", StrategyDoc::baseline().text().to_string()), ("rich", RICH_STRATEGY.to_string())] {
            let (_, strategy) = StrategyDoc::canonicalize(&text).unwrap();
            c.bench_function(&format!("route_all/{name}/{label}"), |b| {
                b.iter(|| {
                    let mut grid = design.grid.clone();
                    let mut nets = design.nets.clone();
                    black_box(route_all(&strategy, &mut grid, &mut nets).unwrap())
                })
            });
        }
    }
}

fn evaluation(c: &mut Criterion) {
    let (_, design) = congested();
    let doc = StrategyDoc::baseline();
    c.bench_function("evaluate/congested/baseline", |b| {
        b.iter(|| black_box(evaluate(doc.text(), &design, 0, &WorkClock::default(), &EvalOptions::default())))
    });
}

fn parsing(c: &mut Criterion) {
    let (text, _) = large();
    c.bench_function("parse_benchmark/large", |b| b.iter(|| black_box(parse_benchmark(&text).unwrap())));
    c.bench_function("strategy/canonicalize", |b| b.iter(|| black_box(StrategyDoc::canonicalize(RICH_STRATEGY).unwrap())));
}

criterion_group!(benches, routing, evaluation, parsing);
criterion_main!(benches);
