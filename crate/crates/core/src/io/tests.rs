// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::eval::{QorRecord, Status, RECORD_VERSION};
use crate::grid::tests::uniform;
use crate::grid::{Coord, Edge, EdgeKind, LayerDir, Net, QorVector, RouteTree};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

#[test]
fn minimal_fixture_transcribes_directly() {
    let b = load_benchmark(&fixture("minimal.gr")).unwrap();
    assert_eq!(b.name, "minimal");
    assert_eq!((b.nx, b.ny, b.layers), (4, 3, 2));
    assert_eq!(b.layer_dirs(), vec![LayerDir::Horizontal, LayerDir::Vertical]);
    let d = b.to_design().unwrap();
    assert_eq!(d.nets[0].pins, vec![Coord::new(0, 0, 0), Coord::new(3, 2, 0)]);
}

fn minimal_text() -> String {
    std::fs::read_to_string(fixture("minimal.gr")).unwrap()
}

#[test]
fn pin_outside_die_names_its_line() {
    let text = minimal_text().replace("35 25 1", "45 25 1");
    let e = parse_benchmark(&text).unwrap_err();
    assert_eq!((e.line, e.col), (11, 1));
    assert!(e.to_string().contains("line 11"));
}

#[test]
fn count_mismatch_is_located() {
    let text = minimal_text().replace("n0 0 2 1", "n0 0 3 1");
    let e = parse_benchmark(&text).unwrap_err();
    assert_eq!(e.line, 12);
    let text = minimal_text().replace("num net 1", "num net 2");
    assert!(parse_benchmark(&text).is_err());
}

#[test]
fn malformed_number_is_located() {
    let text = minimal_text().replace("grid 4 3 2", "grid 4 x3 2");
    let e = parse_benchmark(&text).unwrap_err();
    assert_eq!((e.line, e.col), (1, 8));
}

#[test]
fn adjustment_against_layer_direction_is_rejected() {
    let text = minimal_text().replace("\n0\n", "\n1\n0 0 1 0 1 1 0\n");
    assert!(parse_benchmark(&text).unwrap_err().message.contains("direction"));
    let text = minimal_text().replace("\n0\n", "\n1\n0 0 1 1 0 1 0\n");
    let b = parse_benchmark(&text).unwrap();
    assert_eq!(b.to_design().unwrap().grid.cap(&Edge::new(0, 0, 0, EdgeKind::East)), 0);
}

#[test]
fn missing_adjustment_section_is_allowed() {
    let text = minimal_text().replace("\n0\n", "\n");
    assert!(parse_benchmark(&text).unwrap().adjustments.is_empty());
}

#[test]
fn bundled_fixtures_match_the_generator() {
    let bless = std::env::var_os("ROUTEVOLVE_BLESS").is_some();
    for p in [SynthParams::congested(), SynthParams::large()] {
        let path = fixture(&format!("{}.gr", p.name));
        let text = emit_benchmark(&generate(&p));
        if bless {
            std::fs::write(&path, &text).unwrap();
        }
        assert_eq!(std::fs::read_to_string(&path).unwrap(), text, "{}", path.display());
    }
}

fn random_params(seed: u64) -> SynthParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nx = rng.gen_range(2..20);
    SynthParams {
        name: String::new(),
        nx,
        ny: rng.gen_range(2..20),
        layers: rng.gen_range(1..5),
        capacity: rng.gen_range(0..8),
        tile: rng.gen_range(1..30),
        nets: rng.gen_range(0..30),
        long_fraction: rng.gen_range(0.0..1.0),
        band: rng.gen_bool(0.5).then(|| (0, nx, rng.gen_range(0..3))),
        seed,
    }
}

proptest! {
    #[test]
    fn benchmarks_round_trip(seed in any::<u64>()) {
        let b = generate(&random_params(seed));
        let again = parse_benchmark(&emit_benchmark(&b)).unwrap();
        prop_assert_eq!(again, b);
    }

    #[test]
    fn mutated_text_parses_or_reports_a_location(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bytes = minimal_text().into_bytes();
        for _ in 0..rng.gen_range(1..6) {
            let i = rng.gen_range(0..bytes.len());
            match rng.gen_range(0..3) {
                0 => bytes[i] = rng.gen(),
                1 => { bytes.remove(i); }
                _ => bytes.insert(i, b"0 -9\nx"[rng.gen_range(0..6)]),
            }
        }
        let text = String::from_utf8_lossy(&bytes);
        if let Err(e) = parse_benchmark(&text) {
            prop_assert!(e.line >= 1 && e.col >= 1);
        }
    }
}

#[test]
fn empty_guides_are_header_only() {
    assert_eq!(emit_guides(&[]).unwrap(), format!("{GUIDES_HEADER}\n"));
}

#[test]
fn straight_guide_is_ascending() {
    let g = uniform(4, 2, 2, 1);
    let mut net = Net::new("a", vec![Coord::new(3, 1, 0), Coord::new(0, 1, 0)]);
    let tree = RouteTree::from_edges(Coord::new(3, 1, 0), (0..3).rev().map(|x| Edge::new(x, 1, 0, EdgeKind::East)));
    let mut g = g;
    g.commit_route(&mut net, tree).unwrap();
    let text = emit_guides(&[net]).unwrap();
    assert_eq!(text, format!("{GUIDES_HEADER}\na 3\n0 1 1 1 1 1\n1 1 1 2 1 1\n2 1 1 3 1 1\n!\n"));
    assert!(emit_guides(&[Net::new("b", vec![Coord::new(0, 0, 0)])]).is_err());
}

fn random_record(rng: &mut ChaCha8Rng, iteration: u32) -> QorRecord {
    let status = [Status::Ok, Status::BuildError, Status::RunError, Status::Infeasible][rng.gen_range(0..4)];
    let mut f = || rng.gen_range(0.0..1e6) * if rng.gen_bool(0.1) { 1e-9 } else { 1.0 };
    let qor = (status == Status::Ok).then(|| QorVector {
        gr_wl: f(),
        gr_vc: f().round(),
        gr_twl: f(),
        gr_rt: f(),
        dr_wl: f(),
        dr_vc: f().round(),
        dr_twl: f(),
        dr_rt: f(),
        mo: 3,
        to: 17,
    });
    QorRecord {
        v: RECORD_VERSION,
        iteration,
        candidate_id: format!("{:064x}", rng.gen::<u128>()),
        status,
        repair_attempts: rng.gen_range(0..4),
        qor,
        note: if rng.gen_bool(0.5) { "line 3: \"quoted\"\tand tab".into() } else { String::new() },
    }
}

#[test]
fn history_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let records: Vec<QorRecord> = (0..100).map(|i| random_record(&mut rng, i)).collect();
    let text = emit_history(&records);
    assert_eq!(text.lines().count(), 100);
    assert_eq!(parse_history(&text).unwrap(), records);
}

#[test]
fn truncated_history_names_the_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let records: Vec<QorRecord> = (0..3).map(|i| random_record(&mut rng, i)).collect();
    let text = emit_history(&records);
    let cut = &text[..text.len() - 10];
    assert_eq!(parse_history(cut).unwrap_err(), HistoryError::Truncated { line: 3 });
    let garbled = text.replacen("\"v\":1", "\"v\":1,,", 2);
    assert_eq!(parse_history(&garbled).unwrap_err().line(), 1);
    let future = text.replacen("\"v\":1", "\"v\":9", 1);
    assert_eq!(parse_history(&future).unwrap_err(), HistoryError::Version { line: 1, found: 9 });
}
