// SPDX-License-Identifier: Apache-2.0

//! Least-cost search on a sparsified lattice.
//!
//! The lattice keeps every row and column congruent to the candidate offset
//! modulo the spacing, plus the rows and columns of both endpoints, on every
//! layer. A sparse wire edge spans several unit edges and costs their sum.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use crate::grid::{Coord, Edge, EdgeKind, GcellGrid, LayerDir};

use super::strategy::GridCandidate;
use super::Router;

/// Sorted indices kept along one axis.
pub fn kept_lines(extent: u32, spacing: u32, offset: u32, must: [u32; 2]) -> Vec<u32> {
    let spacing = spacing.max(1);
    let phase = offset % spacing;
    let mut v: Vec<u32> = (0..extent).filter(|i| i % spacing == phase).collect();
    v.extend(must);
    v.sort_unstable();
    v.dedup();
    v
}

#[derive(Clone, Copy, PartialEq)]
struct State {
    cost: f64,
    bends: u32,
    node: usize,
    dir: u8,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap.
        other.cost.total_cmp(&self.cost).then(other.bends.cmp(&self.bends)).then(other.node.cmp(&self.node)).then(other.dir.cmp(&self.dir))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NONE: u8 = 0;
const HORIZONTAL: u8 = 1;
const VERTICAL: u8 = 2;

/// Result of one maze search.
#[derive(Clone, Debug, PartialEq)]
pub struct MazeRoute {
    pub edges: Vec<Edge>,
    pub cost: f64,
    pub bends: u32,
}

impl Router<'_> {
    /// Routes `a -> b` on the sparse lattice of `candidate`, where `hp` is
    /// the owning net's half perimeter in GCell steps. Edges in `own` cost
    /// nothing. `None` only when no path exists on the lattice (the grid
    /// lacks a layer in a required direction); `Some` with no edges when the
    /// endpoints coincide.
    pub fn maze_route(
        &mut self,
        grid: &GcellGrid,
        a: Coord,
        b: Coord,
        candidate: GridCandidate,
        hp: u32,
        own: &BTreeSet<Edge>,
    ) -> Option<MazeRoute> {
        if a == b {
            return Some(MazeRoute { edges: Vec::new(), cost: 0.0, bends: 0 });
        }
        let spacing = candidate.spacing(hp);
        let cols = kept_lines(grid.nx(), spacing, candidate.offset.0, [a.x, b.x]);
        let rows = kept_lines(grid.ny(), spacing, candidate.offset.1, [a.y, b.y]);
        let (nc, nr, nl) = (cols.len(), rows.len(), grid.layers() as usize);
        let node = |ci: usize, ri: usize, l: usize| (l * nr + ri) * nc + ci;
        let unpack = |n: usize| (n % nc, (n / nc) % nr, n / (nc * nr));
        let total = nc * nr * nl;

        let cost_of = |e: &Edge| if own.contains(e) { 0.0 } else { self.edge_cost(grid, e) };
        // Cost of the sparse edge leaving (ci, ri, l) in the layer direction.
        let mut fwd = vec![f64::NAN; total];
        for l in 0..nl {
            let dir = grid.layer_dir(l as u32);
            for ri in 0..nr {
                for ci in 0..nc {
                    let (x, y) = (cols[ci], rows[ri]);
                    let w = match dir {
                        LayerDir::Horizontal if ci + 1 < nc => {
                            (x..cols[ci + 1]).map(|xx| cost_of(&Edge::new(xx, y, l as u32, EdgeKind::East))).sum()
                        }
                        LayerDir::Vertical if ri + 1 < nr => {
                            (y..rows[ri + 1]).map(|yy| cost_of(&Edge::new(x, yy, l as u32, EdgeKind::North))).sum()
                        }
                        _ => continue,
                    };
                    fwd[node(ci, ri, l)] = w;
                }
            }
        }

        let ci_a = cols.binary_search(&a.x).ok()?;
        let ri_a = rows.binary_search(&a.y).ok()?;
        let ci_b = cols.binary_search(&b.x).ok()?;
        let ri_b = rows.binary_search(&b.y).ok()?;
        let start = node(ci_a, ri_a, a.layer as usize);
        let goal = node(ci_b, ri_b, b.layer as usize);

        let mut best = vec![(f64::INFINITY, u32::MAX); total * 3];
        let mut pred = vec![usize::MAX; total * 3];
        let mut heap = BinaryHeap::new();
        best[start * 3] = (0.0, 0);
        heap.push(State { cost: 0.0, bends: 0, node: start, dir: NONE });
        let mut found = None;
        let mut work = 0u64;
        while let Some(s) = heap.pop() {
            let sid = s.node * 3 + s.dir as usize;
            if (s.cost, s.bends) != best[sid] {
                continue;
            }
            work += 1;
            if s.node == goal {
                found = Some(s);
                break;
            }
            let (ci, ri, l) = unpack(s.node);
            let mut moves: [Option<(usize, f64, u8)>; 4] = [None; 4];
            match grid.layer_dir(l as u32) {
                LayerDir::Horizontal => {
                    if ci + 1 < nc {
                        moves[0] = Some((node(ci + 1, ri, l), fwd[s.node], HORIZONTAL));
                    }
                    if ci > 0 {
                        let n = node(ci - 1, ri, l);
                        moves[1] = Some((n, fwd[n], HORIZONTAL));
                    }
                }
                LayerDir::Vertical => {
                    if ri + 1 < nr {
                        moves[0] = Some((node(ci, ri + 1, l), fwd[s.node], VERTICAL));
                    }
                    if ri > 0 {
                        let n = node(ci, ri - 1, l);
                        moves[1] = Some((n, fwd[n], VERTICAL));
                    }
                }
            }
            let (x, y) = (cols[ci], rows[ri]);
            if l + 1 < nl {
                let w = cost_of(&Edge::new(x, y, l as u32, EdgeKind::Up));
                moves[2] = Some((node(ci, ri, l + 1), w, s.dir));
            }
            if l > 0 {
                let w = cost_of(&Edge::new(x, y, l as u32 - 1, EdgeKind::Up));
                moves[3] = Some((node(ci, ri, l - 1), w, s.dir));
            }
            for (next, w, dir) in moves.into_iter().flatten() {
                let bend = u32::from(s.dir != NONE && dir != s.dir);
                let cand = (s.cost + w, s.bends + bend);
                let nid = next * 3 + dir as usize;
                let cur = best[nid];
                if cand.0 < cur.0 || (cand.0 == cur.0 && cand.1 < cur.1) {
                    best[nid] = cand;
                    pred[nid] = sid;
                    heap.push(State { cost: cand.0, bends: cand.1, node: next, dir });
                }
            }
        }
        self.work += work;
        let found = found?;

        let mut edges = Vec::new();
        let mut sid = found.node * 3 + found.dir as usize;
        while pred[sid] != usize::MAX {
            let prev = pred[sid];
            let (c1, r1, l1) = unpack(sid / 3);
            let (c0, r0, l0) = unpack(prev / 3);
            let (p, q) = (Coord::new(cols[c0], rows[r0], l0 as u32), Coord::new(cols[c1], rows[r1], l1 as u32));
            let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
            if lo.layer != hi.layer {
                edges.push(Edge::new(lo.x, lo.y, lo.layer, EdgeKind::Up));
            } else if lo.y == hi.y {
                edges.extend((lo.x..hi.x).map(|xx| Edge::new(xx, lo.y, lo.layer, EdgeKind::East)));
            } else {
                edges.extend((lo.y..hi.y).map(|yy| Edge::new(lo.x, yy, lo.layer, EdgeKind::North)));
            }
            sid = prev;
        }
        Some(MazeRoute { edges, cost: found.cost, bends: found.bends })
    }
}
