// SPDX-License-Identifier: Apache-2.0

//! Multi-pin net decomposition into two-pin segments.

use serde::{Deserialize, Serialize};

use crate::grid::Coord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    TwoHubStar,
    Mst,
    Direct,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    pub kind: TopologyKind,
    pub segments: Vec<(Coord, Coord)>,
}

impl Topology {
    /// Sum of planar Manhattan lengths of all segments, in GCell steps.
    pub fn manhattan_length(&self) -> u64 {
        self.segments.iter().map(|(a, b)| a.manhattan(b) as u64).sum()
    }
}

fn dedup(pins: &[Coord]) -> Vec<Coord> {
    let mut v = pins.to_vec();
    v.sort();
    v.dedup();
    v
}

/// Bounding-box half perimeter in GCell steps.
pub fn half_perimeter_steps(pins: &[Coord]) -> u32 {
    let Some(first) = pins.first() else { return 0 };
    let (mut x0, mut x1, mut y0, mut y1) = (first.x, first.x, first.y, first.y);
    for p in pins {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    (x1 - x0) + (y1 - y0)
}

/// Bounding-box half perimeter in length units for the given tile size.
pub fn half_perimeter(pins: &[Coord], tile: (f64, f64)) -> f64 {
    let Some(first) = pins.first() else { return 0.0 };
    let (mut x0, mut x1, mut y0, mut y1) = (first.x, first.x, first.y, first.y);
    for p in pins {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    (x1 - x0) as f64 * tile.0 + (y1 - y0) as f64 * tile.1
}

/// Star around the two farthest pins. The hub-to-hub segment always comes
/// first so that the trunk is routed before the spokes.
pub fn two_hub_star(pins: &[Coord]) -> Topology {
    let pins = dedup(pins);
    if pins.len() <= 2 {
        return direct(&pins);
    }
    let mut hubs = (pins[0], pins[1]);
    let mut best = 0;
    for (i, a) in pins.iter().enumerate() {
        for b in &pins[i + 1..] {
            // Pins are sorted, so the first maximal pair found is the
            // lexicographically smallest one.
            let d = a.manhattan(b);
            if d > best {
                best = d;
                hubs = (*a, *b);
            }
        }
    }
    let mut segments = vec![hubs];
    for p in &pins {
        if *p == hubs.0 || *p == hubs.1 {
            continue;
        }
        let hub = if p.manhattan(&hubs.0) <= p.manhattan(&hubs.1) { hubs.0 } else { hubs.1 };
        segments.push((hub, *p));
    }
    Topology { kind: TopologyKind::TwoHubStar, segments }
}

/// Manhattan minimum spanning tree (Kruskal, ties broken on endpoints).
pub fn mst(pins: &[Coord]) -> Topology {
    let pins = dedup(pins);
    if pins.len() <= 2 {
        return direct(&pins);
    }
    let mut candidates = Vec::with_capacity(pins.len() * (pins.len() - 1) / 2);
    for i in 0..pins.len() {
        for j in i + 1..pins.len() {
            candidates.push((pins[i].manhattan(&pins[j]), i, j));
        }
    }
    candidates.sort();
    let mut parent: Vec<usize> = (0..pins.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut segments = Vec::with_capacity(pins.len() - 1);
    for (_, i, j) in candidates {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            segments.push((pins[i], pins[j]));
            if segments.len() == pins.len() - 1 {
                break;
            }
        }
    }
    Topology { kind: TopologyKind::Mst, segments }
}

fn direct(pins: &[Coord]) -> Topology {
    let segments = match pins {
        [a, b] => vec![(*a, *b)],
        _ => Vec::new(),
    };
    Topology { kind: TopologyKind::Direct, segments }
}

/// Topology used by the router: two-hub star for three or more pins.
pub fn for_net(pins: &[Coord]) -> Topology {
    two_hub_star(pins)
}
