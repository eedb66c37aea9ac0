// SPDX-License-Identifier: Apache-2.0

//! Seeded benchmark generator for fixtures and round-trip tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::benchmark::{Adjustment, BenchNet, BenchPin, Benchmark};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthParams {
    pub name: String,
    pub nx: u32,
    pub ny: u32,
    /// Alternating horizontal/vertical, starting horizontal.
    pub layers: u32,
    pub capacity: u32,
    pub tile: u32,
    pub nets: usize,
    /// Fraction of nets spanning most of the die.
    pub long_fraction: f64,
    /// Horizontal-edge capacity inside the band of columns
    /// `band.0..band.1`, on every horizontal layer.
    pub band: Option<(u32, u32, u32)>,
    pub seed: u64,
}

impl SynthParams {
    /// 16×16, 100 nets, with a low-capacity vertical band that most nets
    /// have to cross.
    pub fn congested() -> Self {
        Self {
            name: "congested16".into(),
            nx: 16,
            ny: 16,
            layers: 4,
            capacity: 4,
            tile: 10,
            nets: 100,
            long_fraction: 0.2,
            band: Some((7, 9, 2)),
            seed: 2024,
        }
    }

    /// The same construction at 24×24 with 180 nets.
    pub fn large() -> Self {
        Self { name: "large24".into(), nx: 24, ny: 24, nets: 180, band: Some((11, 13, 2)), seed: 4048, ..Self::congested() }
    }
}

pub fn generate(p: &SynthParams) -> Benchmark {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let layers = p.layers as usize;
    let horizontal: Vec<u32> = (0..layers).map(|l| if l % 2 == 0 { p.capacity } else { 0 }).collect();
    let vertical: Vec<u32> = (0..layers).map(|l| if l % 2 == 1 { p.capacity } else { 0 }).collect();
    let tile = p.tile as i64;
    let pin = |rng: &mut ChaCha8Rng, x: u32, y: u32| BenchPin {
        x: x as i64 * tile + rng.gen_range(0..tile),
        y: y as i64 * tile + rng.gen_range(0..tile),
        layer: 1,
    };
    let mut nets = Vec::with_capacity(p.nets);
    for i in 0..p.nets {
        let long = rng.gen_bool(p.long_fraction);
        let k = if long { rng.gen_range(2..=4) } else { rng.gen_range(2..=3) };
        let (cx, cy) = (rng.gen_range(0..p.nx), rng.gen_range(0..p.ny));
        let reach = if long { p.nx.max(p.ny) } else { 3 };
        let mut pins = Vec::new();
        for _ in 0..k {
            let x = (cx as i64 + rng.gen_range(-(reach as i64)..=reach as i64)).clamp(0, p.nx as i64 - 1) as u32;
            let y = (cy as i64 + rng.gen_range(-(reach as i64)..=reach as i64)).clamp(0, p.ny as i64 - 1) as u32;
            pins.push(pin(&mut rng, x, y));
        }
        nets.push(BenchNet { name: format!("n{i}"), id: i as u32, min_width: Some(1), pins });
    }
    let mut adjustments = Vec::new();
    if let Some((x0, x1, cap)) = p.band {
        for l in (0..p.layers).filter(|l| l % 2 == 0) {
            for y in 0..p.ny {
                for x in x0..x1.min(p.nx - 1) {
                    adjustments.push(Adjustment { from: (x, y, l + 1), to: (x + 1, y, l + 1), capacity: cap });
                }
            }
        }
    }
    Benchmark {
        name: p.name.clone(),
        nx: p.nx,
        ny: p.ny,
        layers: p.layers,
        vertical_caps: vertical,
        horizontal_caps: horizontal,
        min_width: vec![1; layers],
        min_spacing: vec![1; layers],
        via_spacing: vec![1; layers],
        origin: (0, 0),
        tile: (p.tile, p.tile),
        nets,
        adjustments,
    }
}
