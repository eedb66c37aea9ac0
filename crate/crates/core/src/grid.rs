// SPDX-License-Identifier: Apache-2.0

//! GCell routing lattice with per-edge capacity and demand bookkeeping.
//!
//! Nodes are `(x, y, layer)` triples. Every node owns at most two outgoing
//! edges: a planar wire edge towards `x + 1` (horizontal layers) or `y + 1`
//! (vertical layers), and a via edge towards `layer + 1`. Edges are always
//! named by their lower endpoint, which makes the edge set totally ordered.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Via capacity used when a benchmark does not constrain vias.
pub const UNBOUNDED: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    Invalid(String),
    #[error("net `{0}` has no route")]
    MissingRoute(String),
    #[error("net `{0}` is not routed")]
    NotRouted(String),
    #[error("net `{net}` has an invalid route: {reason}")]
    InvalidTree { net: String, reason: String },
    #[error("capacity adjustment {0:?} does not name a lattice edge")]
    BadAdjustment(CapacityAdjustment),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerDir {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub x: u32,
    pub y: u32,
    pub layer: u32,
}

impl Coord {
    pub const fn new(x: u32, y: u32, layer: u32) -> Self {
        Self { x, y, layer }
    }

    /// Planar Manhattan distance in GCell steps.
    pub fn manhattan(&self, other: &Coord) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    pub fn xy(&self) -> (u32, u32) {
        (self.x, self.y)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.layer)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// Wire towards `x + 1` on a horizontal layer.
    East,
    /// Wire towards `y + 1` on a vertical layer.
    North,
    /// Via towards `layer + 1`.
    Up,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub x: u32,
    pub y: u32,
    pub layer: u32,
    pub kind: EdgeKind,
}

impl Edge {
    pub const fn new(x: u32, y: u32, layer: u32, kind: EdgeKind) -> Self {
        Self { x, y, layer, kind }
    }

    pub fn from_coord(c: Coord, kind: EdgeKind) -> Self {
        Self::new(c.x, c.y, c.layer, kind)
    }

    pub fn low(&self) -> Coord {
        Coord::new(self.x, self.y, self.layer)
    }

    pub fn high(&self) -> Coord {
        match self.kind {
            EdgeKind::East => Coord::new(self.x + 1, self.y, self.layer),
            EdgeKind::North => Coord::new(self.x, self.y + 1, self.layer),
            EdgeKind::Up => Coord::new(self.x, self.y, self.layer + 1),
        }
    }

    pub fn is_via(&self) -> bool {
        self.kind == EdgeKind::Up
    }

    /// The edge joining two adjacent nodes, if they are adjacent.
    pub fn between(a: Coord, b: Coord) -> Option<Edge> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let kind = if lo.layer == hi.layer && lo.y == hi.y && hi.x == lo.x + 1 {
            EdgeKind::East
        } else if lo.layer == hi.layer && lo.x == hi.x && hi.y == lo.y + 1 {
            EdgeKind::North
        } else if lo.x == hi.x && lo.y == hi.y && hi.layer == lo.layer + 1 {
            EdgeKind::Up
        } else {
            return None;
        };
        Some(Edge::from_coord(lo, kind))
    }
}

/// Post-construction capacity override for one lattice edge, given as the
/// two adjacent GCells it joins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityAdjustment {
    pub from: Coord,
    pub to: Coord,
    pub capacity: u32,
}

/// Everything needed to build a [`GcellGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub nx: u32,
    pub ny: u32,
    pub tile: (f64, f64),
    pub layer_dirs: Vec<LayerDir>,
    /// Wire capacity per layer, applied to every planar edge of that layer.
    pub layer_caps: Vec<u32>,
    pub via_cap: u32,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overflow {
    pub max: u64,
    pub total: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GcellGrid {
    nx: u32,
    ny: u32,
    nl: u32,
    tile: (f64, f64),
    dirs: Vec<LayerDir>,
    cap: Vec<u32>,
    demand: Vec<u32>,
}

impl GcellGrid {
    pub fn new(spec: GridSpec) -> Result<Self, GridError> {
        let nl = spec.layer_dirs.len() as u32;
        if spec.nx == 0 || spec.ny == 0 || nl == 0 {
            return Err(GridError::Invalid(format!("dimensions must be positive, got {}x{}x{}", spec.nx, spec.ny, nl)));
        }
        if !(spec.tile.0 > 0.0 && spec.tile.1 > 0.0) || !spec.tile.0.is_finite() || !spec.tile.1.is_finite() {
            return Err(GridError::Invalid(format!("tile must be positive, got {:?}", spec.tile)));
        }
        if spec.layer_caps.len() != spec.layer_dirs.len() {
            return Err(GridError::Invalid("one capacity per layer is required".into()));
        }
        let nodes = (spec.nx as u64) * (spec.ny as u64) * (nl as u64);
        if nodes > (1 << 28) {
            return Err(GridError::Invalid(format!("grid with {nodes} nodes is too large")));
        }
        let mut grid = Self {
            nx: spec.nx,
            ny: spec.ny,
            nl,
            tile: spec.tile,
            dirs: spec.layer_dirs,
            cap: vec![0; nodes as usize * 2],
            demand: vec![0; nodes as usize * 2],
        };
        for layer in 0..nl {
            for y in 0..grid.ny {
                for x in 0..grid.nx {
                    let c = Coord::new(x, y, layer);
                    let wire = Edge::from_coord(c, grid.wire_kind(layer));
                    if grid.edge_exists(&wire) {
                        let i = grid.edge_index(&wire);
                        grid.cap[i] = spec.layer_caps[layer as usize];
                    }
                    let via = Edge::from_coord(c, EdgeKind::Up);
                    if grid.edge_exists(&via) {
                        let i = grid.edge_index(&via);
                        grid.cap[i] = spec.via_cap;
                    }
                }
            }
        }
        Ok(grid)
    }

    /// Builds the grid and applies capacity adjustments in order.
    pub fn with_adjustments(spec: GridSpec, adjustments: &[CapacityAdjustment]) -> Result<Self, GridError> {
        let mut grid = Self::new(spec)?;
        for adj in adjustments {
            let edge = Edge::between(adj.from, adj.to).filter(|e| grid.edge_exists(e)).ok_or(GridError::BadAdjustment(*adj))?;
            let i = grid.edge_index(&edge);
            grid.cap[i] = adj.capacity;
        }
        Ok(grid)
    }

    pub fn nx(&self) -> u32 {
        self.nx
    }

    pub fn ny(&self) -> u32 {
        self.ny
    }

    pub fn layers(&self) -> u32 {
        self.nl
    }

    pub fn tile(&self) -> (f64, f64) {
        self.tile
    }

    pub fn layer_dir(&self, layer: u32) -> LayerDir {
        self.dirs[layer as usize]
    }

    pub fn layer_dirs(&self) -> &[LayerDir] {
        &self.dirs
    }

    pub fn node_count(&self) -> usize {
        (self.nx * self.ny * self.nl) as usize
    }

    /// Wire kind allowed on `layer`.
    pub fn wire_kind(&self, layer: u32) -> EdgeKind {
        match self.dirs[layer as usize] {
            LayerDir::Horizontal => EdgeKind::East,
            LayerDir::Vertical => EdgeKind::North,
        }
    }

    pub fn contains(&self, c: &Coord) -> bool {
        c.x < self.nx && c.y < self.ny && c.layer < self.nl
    }

    pub fn node_index(&self, c: &Coord) -> usize {
        ((c.layer * self.ny + c.y) * self.nx + c.x) as usize
    }

    pub fn node_at(&self, index: usize) -> Coord {
        let index = index as u32;
        let x = index % self.nx;
        let y = (index / self.nx) % self.ny;
        let layer = index / (self.nx * self.ny);
        Coord::new(x, y, layer)
    }

    pub fn edge_index(&self, e: &Edge) -> usize {
        self.node_index(&e.low()) * 2 + usize::from(e.is_via())
    }

    pub fn edge_exists(&self, e: &Edge) -> bool {
        if !self.contains(&e.low()) {
            return false;
        }
        match e.kind {
            EdgeKind::East => self.dirs[e.layer as usize] == LayerDir::Horizontal && e.x + 1 < self.nx,
            EdgeKind::North => self.dirs[e.layer as usize] == LayerDir::Vertical && e.y + 1 < self.ny,
            EdgeKind::Up => e.layer + 1 < self.nl,
        }
    }

    pub fn cap(&self, e: &Edge) -> u32 {
        self.cap[self.edge_index(e)]
    }

    pub fn set_cap(&mut self, e: &Edge, cap: u32) {
        let i = self.edge_index(e);
        self.cap[i] = cap;
    }

    pub fn demand(&self, e: &Edge) -> u32 {
        self.demand[self.edge_index(e)]
    }

    /// Physical length crossed by an edge; vias have zero planar length.
    pub fn span(&self, e: &Edge) -> f64 {
        match e.kind {
            EdgeKind::East => self.tile.0,
            EdgeKind::North => self.tile.1,
            EdgeKind::Up => 0.0,
        }
    }

    /// All existing edges in ascending order of their index.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.node_count()).flat_map(move |n| {
            let c = self.node_at(n);
            let wire = Edge::from_coord(c, self.wire_kind(c.layer));
            let via = Edge::from_coord(c, EdgeKind::Up);
            [wire, via].into_iter().filter(|e| self.edge_exists(e))
        })
    }

    /// Edges incident to `c`, paired with the node at their far end.
    pub fn neighbors(&self, c: Coord) -> impl Iterator<Item = (Edge, Coord)> + '_ {
        let mut out: [Option<(Edge, Coord)>; 4] = [None; 4];
        let wire = Edge::from_coord(c, self.wire_kind(c.layer));
        if self.edge_exists(&wire) {
            out[0] = Some((wire, wire.high()));
        }
        let back = match wire.kind {
            EdgeKind::East if c.x > 0 => Some(Edge::new(c.x - 1, c.y, c.layer, EdgeKind::East)),
            EdgeKind::North if c.y > 0 => Some(Edge::new(c.x, c.y - 1, c.layer, EdgeKind::North)),
            _ => None,
        };
        if let Some(e) = back {
            out[1] = Some((e, e.low()));
        }
        let up = Edge::from_coord(c, EdgeKind::Up);
        if self.edge_exists(&up) {
            out[2] = Some((up, up.high()));
        }
        if c.layer > 0 {
            let down = Edge::new(c.x, c.y, c.layer - 1, EdgeKind::Up);
            out[3] = Some((down, down.low()));
        }
        out.into_iter().flatten()
    }

    pub fn excess(&self, e: &Edge) -> u32 {
        self.demand(e).saturating_sub(self.cap(e))
    }

    pub fn overflow(&self) -> Overflow {
        let mut ov = Overflow::default();
        for e in self.edges() {
            let x = self.excess(&e) as u64;
            ov.total += x;
            ov.max = ov.max.max(x);
        }
        ov
    }

    /// Edges whose demand exceeds capacity, ascending.
    pub fn overflowed_edges(&self) -> Vec<Edge> {
        self.edges().filter(|e| self.excess(e) > 0).collect()
    }

    pub fn clear_demand(&mut self) {
        self.demand.iter_mut().for_each(|d| *d = 0);
    }

    pub fn demand_snapshot(&self) -> Vec<u32> {
        self.demand.clone()
    }

    fn add_tree(&mut self, tree: &RouteTree) {
        for e in &tree.edges {
            let i = self.edge_index(e);
            self.demand[i] += 1;
        }
    }

    fn remove_tree(&mut self, tree: &RouteTree) {
        for e in &tree.edges {
            let i = self.edge_index(e);
            self.demand[i] = self.demand[i].checked_sub(1).expect("demand underflow: tree was not committed");
        }
    }

    /// Validates `tree` against the net's pins, adds one unit of demand per
    /// tree edge, and stores the tree on the net. Any previous route is
    /// ripped up first.
    pub fn commit_route(&mut self, net: &mut Net, tree: RouteTree) -> Result<(), GridError> {
        tree.validate(self, &net.pins).map_err(|reason| GridError::InvalidTree { net: net.id.clone(), reason })?;
        if net.route.is_some() {
            self.rip_up(net)?;
        }
        self.add_tree(&tree);
        net.route = Some(tree);
        Ok(())
    }

    /// Removes the net's route and its demand.
    pub fn rip_up(&mut self, net: &mut Net) -> Result<RouteTree, GridError> {
        let tree = net.route.take().ok_or_else(|| GridError::NotRouted(net.id.clone()))?;
        self.remove_tree(&tree);
        Ok(tree)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub id: String,
    pub pins: Vec<Coord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<RouteTree>,
}

impl Net {
    pub fn new(id: impl Into<String>, pins: Vec<Coord>) -> Self {
        Self { id: id.into(), pins, route: None }
    }

    /// Pins sorted lexicographically on `(x, y, layer)` with duplicates removed.
    pub fn unique_pins(&self) -> Vec<Coord> {
        let set: BTreeSet<Coord> = self.pins.iter().copied().collect();
        set.into_iter().collect()
    }
}

/// A routed net as a set of lattice edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RouteTree {
    pub root: Coord,
    /// Sorted and duplicate-free.
    pub edges: Vec<Edge>,
}

impl RouteTree {
    pub fn single(root: Coord) -> Self {
        Self { root, edges: Vec::new() }
    }

    pub fn from_edges(root: Coord, edges: impl IntoIterator<Item = Edge>) -> Self {
        let set: BTreeSet<Edge> = edges.into_iter().collect();
        Self { root, edges: set.into_iter().collect() }
    }

    pub fn wire_count(&self) -> usize {
        self.edges.iter().filter(|e| !e.is_via()).count()
    }

    pub fn via_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_via()).count()
    }

    pub fn wirelength(&self, grid: &GcellGrid) -> f64 {
        self.edges.iter().map(|e| grid.span(e)).sum()
    }

    pub fn nodes(&self) -> BTreeSet<Coord> {
        let mut nodes = BTreeSet::new();
        nodes.insert(self.root);
        for e in &self.edges {
            nodes.insert(e.low());
            nodes.insert(e.high());
        }
        nodes
    }

    /// Checks edge existence, uniqueness, connectivity, acyclicity, and that
    /// every pin is spanned.
    pub fn validate(&self, grid: &GcellGrid, pins: &[Coord]) -> Result<(), String> {
        for w in self.edges.windows(2) {
            if w[0] >= w[1] {
                return Err("edges are not sorted and unique".into());
            }
        }
        if let Some(e) = self.edges.iter().find(|e| !grid.edge_exists(e)) {
            return Err(format!("edge {e:?} is not a lattice edge"));
        }
        if !grid.contains(&self.root) {
            return Err(format!("root {} is outside the grid", self.root));
        }
        let nodes = self.nodes();
        if nodes.len() != self.edges.len() + 1 {
            return Err(format!("{} nodes and {} edges do not form a tree", nodes.len(), self.edges.len()));
        }
        let mut adj: BTreeMap<Coord, Vec<Coord>> = BTreeMap::new();
        for e in &self.edges {
            adj.entry(e.low()).or_default().push(e.high());
            adj.entry(e.high()).or_default().push(e.low());
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([self.root]);
        seen.insert(self.root);
        while let Some(c) = queue.pop_front() {
            for n in adj.get(&c).into_iter().flatten() {
                if seen.insert(*n) {
                    queue.push_back(*n);
                }
            }
        }
        if seen.len() != nodes.len() {
            return Err("route is disconnected".into());
        }
        if let Some(p) = pins.iter().find(|p| !seen.contains(p)) {
            return Err(format!("pin {p} is not covered"));
        }
        Ok(())
    }
}

/// Raw quality-of-results vector. Wirelengths are in abstract length units,
/// via counts are dimensionless and runtimes are in seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QorVector {
    pub gr_wl: f64,
    pub gr_vc: f64,
    pub gr_twl: f64,
    pub gr_rt: f64,
    pub dr_wl: f64,
    pub dr_vc: f64,
    pub dr_twl: f64,
    pub dr_rt: f64,
    pub mo: u64,
    pub to: u64,
}

impl QorVector {
    /// Whether both TWL fields equal WL + VC within `rel` relative tolerance.
    pub fn twl_consistent(&self, rel: f64) -> bool {
        let close = |twl: f64, sum: f64| (twl - sum).abs() <= rel * sum.abs().max(1.0);
        close(self.gr_twl, self.gr_wl + self.gr_vc) && close(self.dr_twl, self.dr_wl + self.dr_vc)
    }
}

/// GR wirelength, via count and overflow of a routed net set. DR fields are
/// left at zero.
pub fn metrics(grid: &GcellGrid, nets: &[Net]) -> Result<QorVector, GridError> {
    let mut wl = 0.0;
    let mut vc = 0usize;
    for net in nets {
        let tree = net.route.as_ref().ok_or_else(|| GridError::MissingRoute(net.id.clone()))?;
        wl += tree.wirelength(grid);
        vc += tree.via_count();
    }
    let ov = grid.overflow();
    Ok(QorVector { gr_wl: wl, gr_vc: vc as f64, gr_twl: wl + vc as f64, mo: ov.max, to: ov.total, ..QorVector::default() })
}
