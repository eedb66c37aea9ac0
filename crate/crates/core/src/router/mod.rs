// SPDX-License-Identifier: Apache-2.0

//! The evolvable global router.
//!
//! [`route_all`] interprets a [`RouterStrategy`]: nets are ordered by the
//! strategy's policy, decomposed with the two-hub star, pattern routed,
//! repaired by rip-up-and-reroute over the strategy's candidate grids, and
//! finally refined by the strategy's post passes.

pub mod expr;
mod maze;
mod pattern;
pub mod strategy;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Coord, Edge, GcellGrid, GridError, Net, Overflow, RouteTree};
use crate::topology::{self, Topology};

pub use expr::{CostProgram, EdgeVars, Expr, Var};
pub use maze::{kept_lines, MazeRoute};
pub use pattern::{enumerate_shapes, pattern_order, PatternRoute, Shape};
pub use strategy::{content_id, GridCandidate, OrderPolicy, PatternShape, PostPass, RouterStrategy, StrategyDoc, StrategyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RouterError {
    #[error("net `{0}` has a pin outside the grid")]
    PinOutsideGrid(String),
    #[error("net `{0}` cannot be connected on this grid")]
    Unroutable(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoutingStats {
    /// Rip-up-and-reroute rounds executed after the first pass.
    pub rrr_rounds: u32,
    /// Total overflow after the first pass, then after each kept round.
    pub round_overflow: Vec<u64>,
    /// Wirelength change of each post pass, in strategy order.
    pub pass_wl_deltas: Vec<(String, f64)>,
    /// Search effort: heap pops plus pattern evaluations.
    pub work: u64,
    pub overflow: Overflow,
}

/// Router state shared by every stage of one [`route_all`] call.
pub struct Router<'s> {
    strategy: &'s RouterStrategy,
    program: CostProgram,
    nx: u32,
    /// Pins per GCell column `(x, y)`, all layers.
    pin_count: Vec<u32>,
    /// Per-edge negotiated-congestion counter.
    history: Vec<u32>,
    work: u64,
}

/// Lexicographic net score: excess over effective capacity, wirelength, vias.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreeScore {
    pub excess: f64,
    pub wl: f64,
    pub vias: usize,
}

impl TreeScore {
    fn better_than(&self, other: &TreeScore) -> bool {
        self.excess.total_cmp(&other.excess).then(self.wl.total_cmp(&other.wl)).then(self.vias.cmp(&other.vias)).is_lt()
    }
}

impl<'s> Router<'s> {
    pub fn new(strategy: &'s RouterStrategy, grid: &GcellGrid, nets: &[Net]) -> Result<Self, StrategyError> {
        strategy.validate()?;
        let program = CostProgram::compile(&strategy.cost).map_err(|m| StrategyError { line: 0, message: m })?;
        let mut pin_count = vec![0; (grid.nx() * grid.ny()) as usize];
        for net in nets {
            for p in &net.pins {
                if grid.contains(p) {
                    pin_count[(p.y * grid.nx() + p.x) as usize] += 1;
                }
            }
        }
        Ok(Self { strategy, program, nx: grid.nx(), pin_count, history: vec![0; grid.node_count() * 2], work: 0 })
    }

    pub fn strategy(&self) -> &RouterStrategy {
        self.strategy
    }

    pub fn work(&self) -> u64 {
        self.work
    }

    fn pins_at(&self, x: u32, y: u32) -> u32 {
        self.pin_count[(y * self.nx + x) as usize]
    }

    /// Pins in the GCells touched by the edge.
    pub fn pin_density(&self, e: &Edge) -> u32 {
        let (lo, hi) = (e.low(), e.high());
        if e.is_via() {
            self.pins_at(lo.x, lo.y)
        } else {
            self.pins_at(lo.x, lo.y) + self.pins_at(hi.x, hi.y)
        }
    }

    /// Capacity left after the soft pin-density reservation.
    pub fn effective_cap(&self, grid: &GcellGrid, e: &Edge) -> f64 {
        let cap = grid.cap(e) as f64;
        (cap - self.strategy.soft_reserve * self.pin_density(e) as f64).max(0.0)
    }

    pub fn history(&self, grid: &GcellGrid, e: &Edge) -> u32 {
        self.history[grid.edge_index(e)]
    }

    pub fn edge_vars(&self, grid: &GcellGrid, e: &Edge) -> EdgeVars {
        let cap = self.effective_cap(grid, e);
        let demand = grid.demand(e) as f64;
        let (w, h) = grid.tile();
        let (base_len, via_penalty) = if e.is_via() { (w.min(h), 1.0) } else { (grid.span(e), 0.0) };
        EdgeVars {
            demand,
            cap,
            overflow_excess: (demand + 1.0 - cap).max(0.0),
            pin_density: self.pin_density(e) as f64,
            base_len,
            via_penalty,
            history: self.history(grid, e) as f64,
        }
    }

    pub fn edge_cost(&self, grid: &GcellGrid, e: &Edge) -> f64 {
        self.program.eval(&self.edge_vars(grid, e))
    }

    /// Score of a tree that is not currently committed.
    pub fn score(&self, grid: &GcellGrid, tree: &RouteTree) -> TreeScore {
        let excess = tree.edges.iter().map(|e| (grid.demand(e) as f64 + 1.0 - self.effective_cap(grid, e)).max(0.0)).sum();
        TreeScore { excess, wl: tree.wirelength(grid), vias: tree.via_count() }
    }

    /// Pattern routes every segment, hub segment first, reusing the net's
    /// own edges for free.
    pub fn route_net_pattern(&mut self, grid: &GcellGrid, net: &Net, topo: &Topology) -> Result<RouteTree, RouterError> {
        let mut own = BTreeSet::new();
        for &(a, b) in &topo.segments {
            match self.pattern_route(grid, a, b, &own) {
                Some(r) => own.extend(r.edges),
                None if a == b => {}
                None => return Err(RouterError::Unroutable(net.id.clone())),
            }
        }
        Ok(assemble_tree(&net.unique_pins(), &own))
    }

    /// Routes the net on one candidate grid.
    pub fn route_net_maze(&mut self, grid: &GcellGrid, net: &Net, topo: &Topology, cand: GridCandidate) -> Result<RouteTree, RouterError> {
        let pins = net.unique_pins();
        let hp = topology::half_perimeter_steps(&pins);
        let mut own = BTreeSet::new();
        for &(a, b) in &topo.segments {
            let r = self.maze_route(grid, a, b, cand, hp, &own).ok_or_else(|| RouterError::Unroutable(net.id.clone()))?;
            own.extend(r.edges);
        }
        Ok(assemble_tree(&pins, &own))
    }

    /// Routes the net on every candidate grid and keeps the best-scoring
    /// tree; earlier candidates win ties.
    pub fn route_net_candidates(
        &mut self,
        grid: &GcellGrid,
        net: &Net,
        topo: &Topology,
        candidates: &[GridCandidate],
    ) -> Result<RouteTree, RouterError> {
        let mut best: Option<(TreeScore, RouteTree)> = None;
        for &cand in candidates {
            let tree = self.route_net_maze(grid, net, topo, cand)?;
            let score = self.score(grid, &tree);
            if best.as_ref().is_none_or(|(s, _)| score.better_than(s)) {
                best = Some((score, tree));
            }
        }
        Ok(best.expect("at least one grid candidate").1)
    }
}

/// Net indices in the strategy's routing order. Ties keep input order,
/// permuted by the strategy seed when it is nonzero.
pub fn net_order(strategy: &RouterStrategy, nets: &[Net], tile: (f64, f64)) -> Vec<usize> {
    let mut rank: Vec<usize> = (0..nets.len()).collect();
    if strategy.seed != 0 {
        rank.shuffle(&mut ChaCha8Rng::seed_from_u64(strategy.seed));
    }
    let mut idx: Vec<usize> = (0..nets.len()).collect();
    let hp: Vec<f64> = nets.iter().map(|n| topology::half_perimeter(&n.pins, tile)).collect();
    match strategy.order {
        OrderPolicy::HpwlAsc => idx.sort_by(|&a, &b| hp[a].total_cmp(&hp[b]).then(rank[a].cmp(&rank[b]))),
        OrderPolicy::HpwlDesc => idx.sort_by(|&a, &b| hp[b].total_cmp(&hp[a]).then(rank[a].cmp(&rank[b]))),
        OrderPolicy::PinCountDesc => {
            idx.sort_by(|&a, &b| nets[b].unique_pins().len().cmp(&nets[a].unique_pins().len()).then(rank[a].cmp(&rank[b])))
        }
        OrderPolicy::Id => idx.sort_by(|&a, &b| nets[a].id.cmp(&nets[b].id).then(rank[a].cmp(&rank[b]))),
    }
    idx
}

/// Spanning tree of the union of segment paths rooted at the first pin, with
/// dangling non-pin branches pruned.
pub fn assemble_tree(pins: &[Coord], edges: &BTreeSet<Edge>) -> RouteTree {
    let root = pins[0];
    let mut adj: BTreeMap<Coord, Vec<(Coord, Edge)>> = BTreeMap::new();
    for e in edges {
        adj.entry(e.low()).or_default().push((e.high(), *e));
        adj.entry(e.high()).or_default().push((e.low(), *e));
    }
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    let mut tree: BTreeSet<Edge> = BTreeSet::new();
    while let Some(c) = queue.pop_front() {
        if let Some(ns) = adj.get(&c) {
            for (n, e) in ns {
                if seen.insert(*n) {
                    tree.insert(*e);
                    queue.push_back(*n);
                }
            }
        }
    }
    let keep: BTreeSet<Coord> = pins.iter().copied().collect();
    let mut degree: BTreeMap<Coord, u32> = BTreeMap::new();
    for e in &tree {
        *degree.entry(e.low()).or_default() += 1;
        *degree.entry(e.high()).or_default() += 1;
    }
    let mut leaves: Vec<Coord> = degree.iter().filter(|(c, d)| **d == 1 && !keep.contains(c)).map(|(c, _)| *c).collect();
    while let Some(leaf) = leaves.pop() {
        let Some(e) = tree.iter().find(|e| e.low() == leaf || e.high() == leaf).copied() else { continue };
        tree.remove(&e);
        let other = if e.low() == leaf { e.high() } else { e.low() };
        degree.remove(&leaf);
        let d = degree.get_mut(&other).expect("endpoint tracked");
        *d -= 1;
        if *d == 1 && !keep.contains(&other) {
            leaves.push(other);
        }
    }
    RouteTree { root, edges: tree.into_iter().collect() }
}

struct Snapshot {
    grid: GcellGrid,
    routes: Vec<Option<RouteTree>>,
}

impl Snapshot {
    fn take(grid: &GcellGrid, nets: &[Net]) -> Self {
        Self { grid: grid.clone(), routes: nets.iter().map(|n| n.route.clone()).collect() }
    }

    fn restore(self, grid: &mut GcellGrid, nets: &mut [Net]) {
        *grid = self.grid;
        for (n, r) in nets.iter_mut().zip(self.routes) {
            n.route = r;
        }
    }
}

fn total_wl(grid: &GcellGrid, nets: &[Net]) -> f64 {
    nets.iter().filter_map(|n| n.route.as_ref()).map(|t| t.wirelength(grid)).sum()
}

/// `(total overflow, wirelength)` of the committed solution.
fn quality(grid: &GcellGrid, nets: &[Net]) -> (u64, f64) {
    (grid.overflow().total, total_wl(grid, nets))
}

fn worse(a: (u64, f64), b: (u64, f64)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 > b.1)
}

struct Session<'r, 's> {
    router: &'r mut Router<'s>,
    order: Vec<usize>,
    topos: Vec<Topology>,
}

impl Session<'_, '_> {
    fn commit(&self, grid: &mut GcellGrid, net: &mut Net, tree: RouteTree) -> Result<(), RouterError> {
        grid.commit_route(net, tree)?;
        Ok(())
    }

    fn candidates(&self) -> Vec<GridCandidate> {
        self.router.strategy.grid_candidates.clone()
    }

    fn first_pass(&mut self, grid: &mut GcellGrid, nets: &mut [Net]) -> Result<(), RouterError> {
        for k in 0..self.order.len() {
            let i = self.order[k];
            let tree = self.router.route_net_pattern(grid, &nets[i], &self.topos[i])?;
            self.commit(grid, &mut nets[i], tree)?;
        }
        Ok(())
    }

    /// Negotiated rip-up-and-reroute. A round that raises total overflow is
    /// undone and ends the loop.
    fn rrr(&mut self, grid: &mut GcellGrid, nets: &mut [Net], trace: &mut Vec<u64>) -> Result<u32, RouterError> {
        let mut prev = grid.overflow().total;
        let mut rounds = 0;
        let cands = self.candidates();
        for _ in 0..self.router.strategy.rrr_max_rounds {
            if prev == 0 {
                break;
            }
            rounds += 1;
            let snap = Snapshot::take(grid, nets);
            let hot: BTreeSet<Edge> = grid.overflowed_edges().into_iter().collect();
            for e in &hot {
                self.router.history[grid.edge_index(e)] += 1;
            }
            for k in 0..self.order.len() {
                let i = self.order[k];
                let crosses = nets[i].route.as_ref().is_some_and(|t| t.edges.iter().any(|e| hot.contains(e)));
                if !crosses {
                    continue;
                }
                grid.rip_up(&mut nets[i])?;
                let tree = self.router.route_net_candidates(grid, &nets[i], &self.topos[i], &cands)?;
                self.commit(grid, &mut nets[i], tree)?;
            }
            let now = grid.overflow().total;
            if now > prev {
                snap.restore(grid, nets);
                break;
            }
            prev = now;
            trace.push(now);
        }
        Ok(rounds)
    }

    /// Reroutes each listed net, keeping the new tree only if it scores
    /// better than the old one against the same demand.
    fn reroute_if_better(
        &mut self,
        grid: &mut GcellGrid,
        nets: &mut [Net],
        which: &[usize],
        cands: &[GridCandidate],
    ) -> Result<bool, RouterError> {
        let mut improved = false;
        for &i in which {
            let old = grid.rip_up(&mut nets[i])?;
            let new = self.router.route_net_candidates(grid, &nets[i], &self.topos[i], cands)?;
            let keep_new = self.router.score(grid, &new).better_than(&self.router.score(grid, &old));
            improved |= keep_new;
            self.commit(grid, &mut nets[i], if keep_new { new } else { old })?;
        }
        Ok(improved)
    }

    fn pulse(&mut self, grid: &mut GcellGrid, nets: &mut [Net], fraction: f64) -> Result<(), RouterError> {
        let n = ((fraction * nets.len() as f64).ceil() as usize).min(nets.len());
        let cands = self.candidates();
        for _ in 0..3 {
            let pos: BTreeMap<usize, usize> = self.order.iter().enumerate().map(|(k, &i)| (i, k)).collect();
            let mut by_wl: Vec<(f64, usize)> =
                nets.iter().enumerate().map(|(i, net)| (net.route.as_ref().map_or(0.0, |t| t.wirelength(grid)), i)).collect();
            by_wl.sort_by(|a, b| b.0.total_cmp(&a.0).then(pos[&a.1].cmp(&pos[&b.1])));
            let top: Vec<usize> = by_wl.iter().take(n).map(|&(_, i)| i).collect();
            if !self.reroute_if_better(grid, nets, &top, &cands)? {
                break;
            }
        }
        Ok(())
    }

    fn rebalance(&mut self, grid: &mut GcellGrid, nets: &mut [Net]) -> Result<(), RouterError> {
        for net in nets.iter_mut() {
            if net.route.is_some() {
                grid.rip_up(net)?;
            }
        }
        let cands = self.candidates();
        for k in 0..self.order.len() {
            let i = self.order[k];
            let tree = self.router.route_net_candidates(grid, &nets[i], &self.topos[i], &cands)?;
            self.commit(grid, &mut nets[i], tree)?;
        }
        self.rrr(grid, nets, &mut Vec::new())?;
        Ok(())
    }

    fn compaction(&mut self, grid: &mut GcellGrid, nets: &mut [Net], min_hp: f64, divisor: u32) -> Result<(), RouterError> {
        let tile = grid.tile();
        let which: Vec<usize> = self
            .order
            .iter()
            .copied()
            .filter(|&i| nets[i].unique_pins().len() >= 2 && topology::half_perimeter(&nets[i].pins, tile) >= min_hp)
            .collect();
        self.reroute_if_better(grid, nets, &which, &[GridCandidate::new(divisor, 0, 0)])?;
        Ok(())
    }
}

/// Routes every net on `grid` according to `strategy`. Existing routes are
/// ripped up first. Deterministic in `(strategy, grid, nets)`.
pub fn route_all(strategy: &RouterStrategy, grid: &mut GcellGrid, nets: &mut [Net]) -> Result<RoutingStats, RouterError> {
    for net in nets.iter_mut() {
        if net.pins.is_empty() || net.pins.iter().any(|p| !grid.contains(p)) {
            return Err(RouterError::PinOutsideGrid(net.id.clone()));
        }
        if net.route.is_some() {
            grid.rip_up(net)?;
        }
    }
    let mut router = Router::new(strategy, grid, nets).map_err(|e| RouterError::Unroutable(e.to_string()))?;
    let order = net_order(strategy, nets, grid.tile());
    let topos = nets.iter().map(|n| topology::for_net(&n.pins)).collect();
    let mut session = Session { router: &mut router, order, topos };

    session.first_pass(grid, nets)?;
    let mut trace = vec![grid.overflow().total];
    let rounds = session.rrr(grid, nets, &mut trace)?;

    let mut deltas = Vec::new();
    for pass in strategy.post_passes.clone() {
        let before = quality(grid, nets);
        let snap = Snapshot::take(grid, nets);
        match pass {
            PostPass::Pulse { top_fraction } => session.pulse(grid, nets, top_fraction)?,
            PostPass::Rebalance => session.rebalance(grid, nets)?,
            PostPass::Compaction { min_hp, divisor } => session.compaction(grid, nets, min_hp, divisor)?,
        }
        if worse(quality(grid, nets), before) {
            snap.restore(grid, nets);
        }
        deltas.push((pass.to_string(), total_wl(grid, nets) - before.1));
    }

    Ok(RoutingStats { rrr_rounds: rounds, round_overflow: trace, pass_wl_deltas: deltas, work: router.work, overflow: grid.overflow() })
}
