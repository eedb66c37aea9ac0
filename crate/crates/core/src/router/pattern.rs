// SPDX-License-Identifier: Apache-2.0

//! Pattern routing of two-pin segments: straight, L, Z and monotone 3-bend
//! shapes with greedy lowest-legal-layer assignment.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::grid::{Coord, Edge, EdgeKind, GcellGrid, LayerDir};

use super::strategy::PatternShape;
use super::Router;

/// Planar corner sequence from source to target, endpoints included.
pub type Shape = Vec<(u32, u32)>;

/// A realized segment route.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternRoute {
    pub edges: Vec<Edge>,
    pub cost: f64,
    pub vias: usize,
    pub corners: Shape,
}

fn strictly_between(a: u32, b: u32) -> impl Iterator<Item = u32> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    lo + 1..hi
}

/// Planar shapes for `a -> b` drawn from `shapes`. Aligned endpoints only
/// admit the straight route.
pub fn enumerate_shapes(a: (u32, u32), b: (u32, u32), shapes: &BTreeSet<PatternShape>) -> Vec<Shape> {
    let (ax, ay) = a;
    let (bx, by) = b;
    if ax == bx || ay == by {
        return vec![vec![a, b]];
    }
    let mut out = Vec::new();
    for s in shapes {
        match s {
            PatternShape::L => {
                out.push(vec![a, (bx, ay), b]);
                out.push(vec![a, (ax, by), b]);
            }
            PatternShape::Z => {
                for mx in strictly_between(ax, bx) {
                    out.push(vec![a, (mx, ay), (mx, by), b]);
                }
                for my in strictly_between(ay, by) {
                    out.push(vec![a, (ax, my), (bx, my), b]);
                }
            }
            PatternShape::ThreeBend => {
                for mx in strictly_between(ax, bx) {
                    for my in strictly_between(ay, by) {
                        out.push(vec![a, (mx, ay), (mx, my), (bx, my), b]);
                        out.push(vec![a, (ax, my), (mx, my), (mx, by), b]);
                    }
                }
            }
        }
    }
    if out.is_empty() {
        // Shapes that need interior rows or columns may not fit; fall back to L.
        out.push(vec![a, (bx, ay), b]);
        out.push(vec![a, (ax, by), b]);
    }
    out
}

pub(crate) fn via_stack(x: u32, y: u32, from: u32, to: u32) -> impl Iterator<Item = Edge> {
    let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
    (lo..hi).map(move |l| Edge::new(x, y, l, EdgeKind::Up))
}

fn run_edges(p: (u32, u32), q: (u32, u32), layer: u32) -> Vec<Edge> {
    if p.1 == q.1 {
        let (lo, hi) = if p.0 <= q.0 { (p.0, q.0) } else { (q.0, p.0) };
        (lo..hi).map(|x| Edge::new(x, p.1, layer, EdgeKind::East)).collect()
    } else {
        let (lo, hi) = if p.1 <= q.1 { (p.1, q.1) } else { (q.1, p.1) };
        (lo..hi).map(|y| Edge::new(p.0, y, layer, EdgeKind::North)).collect()
    }
}

impl Router<'_> {
    fn edge_cost_own(&self, grid: &GcellGrid, e: &Edge, own: &BTreeSet<Edge>) -> f64 {
        if own.contains(e) {
            0.0
        } else {
            self.edge_cost(grid, e)
        }
    }

    /// Lowest layer of the run's direction on which every edge fits under
    /// effective capacity; otherwise the cheapest such layer.
    fn assign_layer(&self, grid: &GcellGrid, p: (u32, u32), q: (u32, u32), own: &BTreeSet<Edge>) -> Option<(u32, Vec<Edge>)> {
        let want = if p.1 == q.1 { LayerDir::Horizontal } else { LayerDir::Vertical };
        let mut cheapest: Option<(f64, u32, Vec<Edge>)> = None;
        for layer in 0..grid.layers() {
            if grid.layer_dir(layer) != want {
                continue;
            }
            let edges = run_edges(p, q, layer);
            let fits = edges.iter().all(|e| own.contains(e) || grid.demand(e) as f64 + 1.0 <= self.effective_cap(grid, e));
            if fits {
                return Some((layer, edges));
            }
            let cost: f64 = edges.iter().map(|e| self.edge_cost_own(grid, e, own)).sum();
            if cheapest.as_ref().is_none_or(|(c, ..)| cost < *c) {
                cheapest = Some((cost, layer, edges));
            }
        }
        cheapest.map(|(_, l, e)| (l, e))
    }

    /// Assigns layers to a planar shape and prices it. `None` when the grid
    /// lacks a layer in a required direction.
    pub fn realize_shape(
        &self,
        grid: &GcellGrid,
        shape: &[(u32, u32)],
        from_layer: u32,
        to_layer: u32,
        own: &BTreeSet<Edge>,
    ) -> Option<PatternRoute> {
        let mut edges = Vec::new();
        let mut layer = from_layer;
        for w in shape.windows(2) {
            let (p, q) = (w[0], w[1]);
            if p == q {
                continue;
            }
            let (next, run) = self.assign_layer(grid, p, q, own)?;
            edges.extend(via_stack(p.0, p.1, layer, next));
            edges.extend(run);
            layer = next;
        }
        let end = *shape.last()?;
        edges.extend(via_stack(end.0, end.1, layer, to_layer));
        let cost = edges.iter().map(|e| self.edge_cost_own(grid, e, own)).sum();
        let vias = edges.iter().filter(|e| e.is_via()).count();
        Some(PatternRoute { edges, cost, vias, corners: shape.to_vec() })
    }

    /// Cheapest pattern route for one segment; `None` when the endpoints
    /// coincide.
    pub fn pattern_route(&mut self, grid: &GcellGrid, a: Coord, b: Coord, own: &BTreeSet<Edge>) -> Option<PatternRoute> {
        if a == b {
            return None;
        }
        let shapes = enumerate_shapes(a.xy(), b.xy(), &self.strategy.patterns);
        let mut best: Option<PatternRoute> = None;
        for shape in shapes {
            self.work += 1;
            let Some(r) = self.realize_shape(grid, &shape, a.layer, b.layer, own) else { continue };
            let better = match &best {
                None => true,
                Some(cur) => pattern_order(&r, cur) == Ordering::Less,
            };
            if better {
                best = Some(r);
            }
        }
        best
    }
}

/// Ranking of pattern routes: cost, then via count, then corner coordinates.
pub fn pattern_order(a: &PatternRoute, b: &PatternRoute) -> Ordering {
    a.cost.total_cmp(&b.cost).then(a.vias.cmp(&b.vias)).then_with(|| a.corners.cmp(&b.corners))
}
