// SPDX-License-Identifier: Apache-2.0

//! Detailed-routing proxy: every net is rerouted on an `F`-times refined
//! lattice, confined to a corridor around its global route.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use crate::grid::{Coord, Edge, EdgeKind, GcellGrid, GridSpec, Net, Overflow, UNBOUNDED};
use crate::router::{assemble_tree, net_order, Router, RouterStrategy};
use crate::topology;

/// Corridor widenings tried after the first attempt fails.
pub const MAX_WIDENINGS: u32 = 3;
/// Negotiation rounds on the fine lattice.
pub const DR_ROUNDS: u32 = 6;
/// Cost of one unit of excess, in multiples of the edge length.
const EXCESS_PENALTY: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DrParams {
    pub expansion: u32,
    pub slack: u32,
}

impl Default for DrParams {
    fn default() -> Self {
        Self { expansion: 2, slack: 1 }
    }
}

#[derive(Clone, Debug)]
pub struct DrOutcome {
    pub grid: GcellGrid,
    pub nets: Vec<Net>,
    pub wl: f64,
    pub vc: usize,
    pub overflow: Overflow,
    pub unrouted: Vec<String>,
    pub work: u64,
}

impl DrOutcome {
    pub fn feasible(&self) -> bool {
        self.unrouted.is_empty() && self.overflow.total == 0
    }
}

/// Number of lattice nodes the proxy allocates for `grid`.
pub fn fine_node_count(grid: &GcellGrid, expansion: u32) -> u64 {
    let f = expansion as u64;
    grid.nx() as u64 * f * grid.ny() as u64 * f * grid.layers() as u64
}

/// Splits `cap` over `parts` tracks; the lowest tracks take the remainder.
pub fn split_cap(cap: u32, parts: u32, index: u32) -> u32 {
    if cap == UNBOUNDED {
        return UNBOUNDED;
    }
    cap / parts + u32::from(index < cap % parts)
}

/// Builds the refined lattice. `coarse_cap` gives the capacity each coarse
/// edge hands down.
pub fn refine(grid: &GcellGrid, f: u32, coarse_cap: impl Fn(&Edge) -> u32) -> GcellGrid {
    let (w, h) = grid.tile();
    let mut fine = GcellGrid::new(GridSpec {
        nx: grid.nx() * f,
        ny: grid.ny() * f,
        tile: (w / f as f64, h / f as f64),
        layer_dirs: grid.layer_dirs().to_vec(),
        layer_caps: vec![0; grid.layers() as usize],
        via_cap: 0,
    })
    .expect("refined grid is valid when the coarse grid is");
    let edges: Vec<Edge> = fine.edges().collect();
    for e in edges {
        let (cx, cy) = (e.x / f, e.y / f);
        let (sx, sy) = (e.x % f, e.y % f);
        let cap = if e.is_via() {
            split_cap(coarse_cap(&Edge::new(cx, cy, e.layer, e.kind)), f * f, sy * f + sx)
        } else {
            // Tracks run across the coarse edge; cells past the last coarse
            // edge borrow the one before them.
            let horizontal = e.kind == EdgeKind::East;
            let (along, extent, track) = if horizontal { (cx, grid.nx(), sy) } else { (cy, grid.ny(), sx) };
            if extent < 2 {
                0
            } else {
                let along = along.min(extent - 2);
                let coarse = if horizontal { Edge::new(along, cy, e.layer, e.kind) } else { Edge::new(cx, along, e.layer, e.kind) };
                split_cap(coarse_cap(&coarse), f, track)
            }
        };
        fine.set_cap(&e, cap);
    }
    fine
}

#[derive(Clone, Copy, PartialEq)]
struct Item {
    cost: f64,
    node: usize,
}

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct FineRouter {
    grid: GcellGrid,
    history: Vec<u32>,
    dist: Vec<f64>,
    prev: Vec<Option<(usize, Edge)>>,
    stamp: Vec<u32>,
    generation: u32,
    work: u64,
}

impl FineRouter {
    fn new(grid: GcellGrid) -> Self {
        let n = grid.node_count();
        Self { history: vec![0; n * 2], dist: vec![0.0; n], prev: vec![None; n], stamp: vec![0; n], generation: 0, work: 0, grid }
    }

    fn cost(&self, e: &Edge) -> f64 {
        let g = &self.grid;
        let (w, h) = g.tile();
        let base = if e.is_via() { w.min(h) } else { g.span(e) };
        let cap = g.cap(e);
        let excess = if cap == UNBOUNDED { 0 } else { (g.demand(e) + 1).saturating_sub(cap) };
        base * (1.0 + self.history[g.edge_index(e)] as f64) + EXCESS_PENALTY * base * excess as f64
    }

    /// Least-cost path inside `corridor` (indexed by fine `(x, y)`).
    fn search(&mut self, a: Coord, b: Coord, corridor: &[bool], own: &BTreeSet<Edge>) -> Option<Vec<Edge>> {
        if a == b {
            return Some(Vec::new());
        }
        self.generation += 1;
        let gen = self.generation;
        let nx = self.grid.nx();
        let start = self.grid.node_index(&a);
        let goal = self.grid.node_index(&b);
        self.stamp[start] = gen;
        self.dist[start] = 0.0;
        self.prev[start] = None;
        let mut heap = BinaryHeap::from([Item { cost: 0.0, node: start }]);
        let mut reached = false;
        while let Some(Item { cost, node }) = heap.pop() {
            if cost > self.dist[node] {
                continue;
            }
            self.work += 1;
            if node == goal {
                reached = true;
                break;
            }
            let u = self.grid.node_at(node);
            let steps: Vec<(Edge, Coord)> = self.grid.neighbors(u).collect();
            for (e, v) in steps {
                if !corridor[(v.y * nx + v.x) as usize] {
                    continue;
                }
                let w = if own.contains(&e) { 0.0 } else { self.cost(&e) };
                let vi = self.grid.node_index(&v);
                let nd = cost + w;
                if self.stamp[vi] != gen || nd < self.dist[vi] {
                    self.stamp[vi] = gen;
                    self.dist[vi] = nd;
                    self.prev[vi] = Some((node, e));
                    heap.push(Item { cost: nd, node: vi });
                }
            }
        }
        if !reached {
            return None;
        }
        let mut edges = Vec::new();
        let mut at = goal;
        while let Some((p, e)) = self.prev[at] {
            edges.push(e);
            at = p;
        }
        Some(edges)
    }

    fn route(&mut self, pins: &[Coord], corridor: &[bool]) -> Option<crate::grid::RouteTree> {
        let topo = topology::for_net(pins);
        let mut own = BTreeSet::new();
        for &(a, b) in &topo.segments {
            let path = self.search(a, b, corridor, &own)?;
            own.extend(path);
        }
        let unique: Vec<Coord> = pins.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        Some(assemble_tree(&unique, &own))
    }
}

/// Fine columns covered by the net's global route dilated by `slack`
/// coarse cells.
fn corridor(coarse: &GcellGrid, f: u32, net: &Net, slack: u32) -> Vec<bool> {
    let (nx, ny) = (coarse.nx(), coarse.ny());
    let mut cells: BTreeSet<(u32, u32)> = net.pins.iter().map(Coord::xy).collect();
    if let Some(t) = &net.route {
        cells.extend(t.nodes().iter().map(Coord::xy));
    }
    let fnx = nx * f;
    let mut mask = vec![false; (fnx * ny * f) as usize];
    for (x, y) in cells {
        let (x0, x1) = (x.saturating_sub(slack), (x + slack).min(nx - 1));
        let (y0, y1) = (y.saturating_sub(slack), (y + slack).min(ny - 1));
        for fy in y0 * f..(y1 + 1) * f {
            for fx in x0 * f..(x1 + 1) * f {
                mask[(fy * fnx + fx) as usize] = true;
            }
        }
    }
    mask
}

/// Runs the proxy on globally routed `nets`. Nets go in the strategy's
/// order; capacity withheld by the strategy's soft reservation stays
/// withheld on the fine lattice.
pub fn dr_proxy(strategy: &RouterStrategy, grid: &GcellGrid, nets: &[Net], params: DrParams) -> DrOutcome {
    let f = params.expansion.max(1);
    let reserve = Router::new(strategy, grid, nets).expect("strategy validated before routing");
    let fine = refine(grid, f, |e| {
        let cap = grid.cap(e);
        if cap == UNBOUNDED {
            UNBOUNDED
        } else {
            reserve.effective_cap(grid, e).floor() as u32
        }
    });
    let mut fr = FineRouter::new(fine);
    let mut fine_nets: Vec<Net> =
        nets.iter().map(|n| Net::new(n.id.clone(), n.pins.iter().map(|p| Coord::new(p.x * f, p.y * f, p.layer)).collect())).collect();
    let order = net_order(strategy, nets, grid.tile());
    let mut corridors: Vec<Vec<bool>> = vec![Vec::new(); nets.len()];
    let mut unrouted = Vec::new();

    for &i in &order {
        let mut routed = false;
        for widen in 0..=MAX_WIDENINGS {
            let mask = corridor(grid, f, &nets[i], params.slack + widen);
            if let Some(tree) = fr.route(&fine_nets[i].pins, &mask) {
                fr.grid.commit_route(&mut fine_nets[i], tree).expect("assembled tree is valid");
                corridors[i] = mask;
                routed = true;
                break;
            }
        }
        if !routed {
            unrouted.push(nets[i].id.clone());
        }
    }

    if unrouted.is_empty() {
        let mut best = (fr.grid.overflow().total, fr.grid.clone(), fine_nets.clone());
        for _ in 0..DR_ROUNDS {
            if best.0 == 0 {
                break;
            }
            let hot: BTreeSet<Edge> = fr.grid.overflowed_edges().into_iter().collect();
            for e in &hot {
                let k = fr.grid.edge_index(e);
                fr.history[k] += 1;
            }
            for &i in &order {
                let crosses = fine_nets[i].route.as_ref().is_some_and(|t| t.edges.iter().any(|e| hot.contains(e)));
                if !crosses {
                    continue;
                }
                let old = fr.grid.rip_up(&mut fine_nets[i]).expect("net was routed");
                let tree = fr.route(&fine_nets[i].pins, &corridors[i]).unwrap_or(old);
                fr.grid.commit_route(&mut fine_nets[i], tree).expect("tree is valid");
            }
            let total = fr.grid.overflow().total;
            if total < best.0 {
                best = (total, fr.grid.clone(), fine_nets.clone());
            }
        }
        fr.grid = best.1;
        fine_nets = best.2;
    }

    let (mut wl, mut vc) = (0.0, 0);
    for n in &fine_nets {
        if let Some(t) = &n.route {
            wl += t.wirelength(&fr.grid);
            vc += t.via_count();
        }
    }
    DrOutcome { overflow: fr.grid.overflow(), grid: fr.grid, nets: fine_nets, wl, vc, unrouted, work: fr.work }
}
