// SPDX-License-Identifier: Apache-2.0

//! ISPD-2008 global routing benchmark text.
//!
//! ```text
//! grid 16 16 2
//! vertical capacity 0 4
//! horizontal capacity 4 0
//! minimum width 1 1
//! minimum spacing 1 1
//! via spacing 1 1
//! 0 0 10 10
//! num net 1
//! n0 0 2 1
//! 5 5 1
//! 95 45 1
//! 1
//! 3 3 1 4 3 1 2
//! ```
//!
//! Pins are physical coordinates with 1-based layers; they map to the GCell
//! containing them. Adjustments use GCell indices and 1-based layers.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::eval::Design;
use crate::grid::{CapacityAdjustment, Coord, GcellGrid, GridError, GridSpec, LayerDir, Net, UNBOUNDED};

/// Largest accepted grid extent along either axis.
pub const MAX_EXTENT: u32 = 4096;
pub const MAX_LAYERS: u32 = 32;
/// Largest accepted GCell count over all layers.
pub const MAX_NODES: u64 = 1 << 26;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchPin {
    pub x: i64,
    pub y: i64,
    /// 1-based.
    pub layer: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchNet {
    pub name: String,
    pub id: u32,
    pub min_width: Option<u32>,
    pub pins: Vec<BenchPin>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjustment {
    pub from: (u32, u32, u32),
    pub to: (u32, u32, u32),
    pub capacity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Benchmark {
    pub name: String,
    pub nx: u32,
    pub ny: u32,
    pub layers: u32,
    pub vertical_caps: Vec<u32>,
    pub horizontal_caps: Vec<u32>,
    pub min_width: Vec<u32>,
    pub min_spacing: Vec<u32>,
    pub via_spacing: Vec<u32>,
    pub origin: (i64, i64),
    pub tile: (u32, u32),
    pub nets: Vec<BenchNet>,
    pub adjustments: Vec<Adjustment>,
}

impl Benchmark {
    /// Horizontal when horizontal capacity is larger, vertical when vertical
    /// is larger, horizontal on ties between nonzero capacities, and
    /// alternating from horizontal when a layer has no capacity at all.
    pub fn layer_dirs(&self) -> Vec<LayerDir> {
        layer_dirs(&self.horizontal_caps, &self.vertical_caps)
    }

    pub fn grid_spec(&self) -> GridSpec {
        let dirs = self.layer_dirs();
        let caps = dirs
            .iter()
            .enumerate()
            .map(|(l, d)| match d {
                LayerDir::Horizontal => self.horizontal_caps[l],
                LayerDir::Vertical => self.vertical_caps[l],
            })
            .collect();
        GridSpec {
            nx: self.nx,
            ny: self.ny,
            tile: (self.tile.0 as f64, self.tile.1 as f64),
            layer_dirs: dirs,
            layer_caps: caps,
            via_cap: UNBOUNDED,
        }
    }

    /// GCell holding a physical pin.
    pub fn pin_gcell(&self, p: &BenchPin) -> Coord {
        let x = (p.x - self.origin.0).div_euclid(self.tile.0 as i64) as u32;
        let y = (p.y - self.origin.1).div_euclid(self.tile.1 as i64) as u32;
        Coord::new(x, y, p.layer - 1)
    }

    pub fn to_design(&self) -> Result<Design, GridError> {
        let adjustments: Vec<CapacityAdjustment> = self
            .adjustments
            .iter()
            .map(|a| CapacityAdjustment {
                from: Coord::new(a.from.0, a.from.1, a.from.2 - 1),
                to: Coord::new(a.to.0, a.to.1, a.to.2 - 1),
                capacity: a.capacity,
            })
            .collect();
        let grid = GcellGrid::with_adjustments(self.grid_spec(), &adjustments)?;
        let nets = self.nets.iter().map(|n| Net::new(n.name.clone(), n.pins.iter().map(|p| self.pin_gcell(p)).collect())).collect();
        Ok(Design { name: self.name.clone(), grid, nets })
    }
}

fn layer_dirs(horizontal: &[u32], vertical: &[u32]) -> Vec<LayerDir> {
    horizontal
        .iter()
        .zip(vertical)
        .enumerate()
        .map(|(l, (&h, &v))| {
            if h == 0 && v == 0 {
                if l % 2 == 0 {
                    LayerDir::Horizontal
                } else {
                    LayerDir::Vertical
                }
            } else if v > h {
                LayerDir::Vertical
            } else {
                LayerDir::Horizontal
            }
        })
        .collect()
}

fn join(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "grid {} {} {}", self.nx, self.ny, self.layers)?;
        writeln!(f, "vertical capacity {}", join(&self.vertical_caps))?;
        writeln!(f, "horizontal capacity {}", join(&self.horizontal_caps))?;
        writeln!(f, "minimum width {}", join(&self.min_width))?;
        writeln!(f, "minimum spacing {}", join(&self.min_spacing))?;
        writeln!(f, "via spacing {}", join(&self.via_spacing))?;
        writeln!(f, "{} {} {} {}", self.origin.0, self.origin.1, self.tile.0, self.tile.1)?;
        writeln!(f, "num net {}", self.nets.len())?;
        for n in &self.nets {
            write!(f, "{} {} {}", n.name, n.id, n.pins.len())?;
            if let Some(w) = n.min_width {
                write!(f, " {w}")?;
            }
            writeln!(f)?;
            for p in &n.pins {
                writeln!(f, "{} {} {}", p.x, p.y, p.layer)?;
            }
        }
        writeln!(f, "{}", self.adjustments.len())?;
        for a in &self.adjustments {
            writeln!(f, "{} {} {} {} {} {} {}", a.from.0, a.from.1, a.from.2, a.to.0, a.to.1, a.to.2, a.capacity)?;
        }
        Ok(())
    }
}

/// Benchmark text for `b`; parsing it yields `b` again.
pub fn emit_benchmark(b: &Benchmark) -> String {
    let mut s = String::new();
    write!(s, "{b}").expect("writing to a string cannot fail");
    s
}

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    col: usize,
}

struct Line<'a> {
    no: usize,
    tokens: Vec<Token<'a>>,
    end_col: usize,
}

struct Lines<'a> {
    lines: Vec<Line<'a>>,
    next: usize,
    last_no: usize,
}

fn tokenize(no: usize, raw: &str) -> Line<'_> {
    let mut tokens = Vec::new();
    let mut start = None;
    let mut col = 0;
    for (ci, (bi, ch)) in raw.char_indices().enumerate() {
        col = ci + 1;
        if ch.is_whitespace() {
            if let Some((sb, sc)) = start.take() {
                tokens.push(Token { text: &raw[sb..bi], col: sc });
            }
        } else if start.is_none() {
            start = Some((bi, ci + 1));
        }
    }
    if let Some((sb, sc)) = start {
        tokens.push(Token { text: &raw[sb..], col: sc });
    }
    Line { no, tokens, end_col: col + 1 }
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let mut lines = Vec::new();
        let mut last_no = 0;
        for (i, raw) in text.lines().enumerate() {
            last_no = i + 1;
            let line = tokenize(i + 1, raw);
            if !line.tokens.is_empty() {
                lines.push(line);
            }
        }
        Self { lines, next: 0, last_no }
    }

    fn next(&mut self, what: &str) -> Result<&Line<'a>, ParseError> {
        let Some(line) = self.lines.get(self.next) else {
            return Err(ParseError { line: self.last_no + 1, col: 1, message: format!("unexpected end of input, expected {what}") });
        };
        self.next += 1;
        Ok(line)
    }

    fn rest(&self) -> Option<&Line<'a>> {
        self.lines.get(self.next)
    }
}

fn err(line: usize, col: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, col, message: message.into() }
}

impl Line<'_> {
    fn expect_len(&self, n: usize, what: &str) -> Result<(), ParseError> {
        match self.tokens.len().cmp(&n) {
            std::cmp::Ordering::Equal => Ok(()),
            std::cmp::Ordering::Less => {
                Err(err(self.no, self.end_col, format!("{what}: expected {n} fields, found {}", self.tokens.len())))
            }
            std::cmp::Ordering::Greater => {
                Err(err(self.no, self.tokens[n].col, format!("{what}: unexpected field `{}`", self.tokens[n].text)))
            }
        }
    }

    fn keyword(&self, i: usize, word: &str) -> Result<(), ParseError> {
        match self.tokens.get(i) {
            Some(t) if t.text.eq_ignore_ascii_case(word) => Ok(()),
            Some(t) => Err(err(self.no, t.col, format!("expected `{word}`, found `{}`", t.text))),
            None => Err(err(self.no, self.end_col, format!("expected `{word}`"))),
        }
    }

    fn num<T: std::str::FromStr>(&self, i: usize, what: &str) -> Result<T, ParseError> {
        let t = self.tokens.get(i).ok_or_else(|| err(self.no, self.end_col, format!("missing {what}")))?;
        t.text.parse().map_err(|_| err(self.no, t.col, format!("malformed {what} `{}`", t.text)))
    }

    fn col(&self, i: usize) -> usize {
        self.tokens.get(i).map_or(self.end_col, |t| t.col)
    }
}

fn per_layer(lines: &mut Lines<'_>, words: &[&str], layers: u32) -> Result<Vec<u32>, ParseError> {
    let what = words.join(" ");
    let line = lines.next(&what)?;
    for (i, w) in words.iter().enumerate() {
        line.keyword(i, w)?;
    }
    line.expect_len(words.len() + layers as usize, &what)?;
    (0..layers as usize).map(|l| line.num(words.len() + l, &what)).collect()
}

/// Parses benchmark text. Every failure carries the 1-based line and column.
pub fn parse_benchmark(text: &str) -> Result<Benchmark, ParseError> {
    let mut lines = Lines::new(text);

    let line = lines.next("grid header")?;
    line.keyword(0, "grid")?;
    line.expect_len(4, "grid header")?;
    let (nx, ny, layers): (u32, u32, u32) = (line.num(1, "grid width")?, line.num(2, "grid height")?, line.num(3, "layer count")?);
    if nx == 0 || ny == 0 || nx > MAX_EXTENT || ny > MAX_EXTENT {
        return Err(err(line.no, line.col(1), format!("grid extent must be within 1..={MAX_EXTENT}")));
    }
    if layers == 0 || layers > MAX_LAYERS {
        return Err(err(line.no, line.col(3), format!("layer count must be within 1..={MAX_LAYERS}")));
    }
    if nx as u64 * ny as u64 * layers as u64 > MAX_NODES {
        return Err(err(line.no, line.col(1), "grid is too large"));
    }

    let vertical_caps = per_layer(&mut lines, &["vertical", "capacity"], layers)?;
    let horizontal_caps = per_layer(&mut lines, &["horizontal", "capacity"], layers)?;
    let min_width = per_layer(&mut lines, &["minimum", "width"], layers)?;
    let min_spacing = per_layer(&mut lines, &["minimum", "spacing"], layers)?;
    let via_spacing = per_layer(&mut lines, &["via", "spacing"], layers)?;

    let line = lines.next("origin and tile size")?;
    line.expect_len(4, "origin and tile size")?;
    let origin: (i64, i64) = (line.num(0, "origin x")?, line.num(1, "origin y")?);
    let tile: (u32, u32) = (line.num(2, "tile width")?, line.num(3, "tile height")?);
    if tile.0 == 0 || tile.1 == 0 {
        return Err(err(line.no, line.col(if tile.0 == 0 { 2 } else { 3 }), "tile size must be positive"));
    }
    let die = (origin.0.checked_add(nx as i64 * tile.0 as i64), origin.1.checked_add(ny as i64 * tile.1 as i64));
    let (Some(die_x), Some(die_y)) = die else {
        return Err(err(line.no, line.col(0), "die extent overflows"));
    };

    let line = lines.next("net count")?;
    line.keyword(0, "num")?;
    line.keyword(1, "net")?;
    line.expect_len(3, "net count")?;
    let declared: u64 = line.num(2, "net count")?;

    let mut nets = Vec::new();
    for _ in 0..declared {
        let line = lines.next("net header")?;
        if line.tokens.len() != 3 && line.tokens.len() != 4 {
            return Err(err(line.no, line.col(0), "net header: expected `name id pins [min-width]`"));
        }
        let name = line.tokens[0].text.to_string();
        let id: u32 = line.num(1, "net id")?;
        let npins: u64 = line.num(2, "pin count")?;
        let min_width = if line.tokens.len() == 4 { Some(line.num(3, "net minimum width")?) } else { None };
        if npins == 0 {
            return Err(err(line.no, line.col(2), format!("net `{name}` has no pins")));
        }
        let mut pins = Vec::new();
        for _ in 0..npins {
            let pl = lines.next("pin")?;
            pl.expect_len(3, "pin")?;
            let x: i64 = pl.num(0, "pin x")?;
            let y: i64 = pl.num(1, "pin y")?;
            let layer: u32 = pl.num(2, "pin layer")?;
            if x < origin.0 || x >= die_x {
                return Err(err(pl.no, pl.col(0), format!("pin x {x} is outside the die")));
            }
            if y < origin.1 || y >= die_y {
                return Err(err(pl.no, pl.col(1), format!("pin y {y} is outside the die")));
            }
            if layer == 0 || layer > layers {
                return Err(err(pl.no, pl.col(2), format!("pin layer {layer} is outside 1..={layers}")));
            }
            pins.push(BenchPin { x, y, layer });
        }
        nets.push(BenchNet { name, id, min_width, pins });
    }

    let dirs = layer_dirs(&horizontal_caps, &vertical_caps);
    let mut adjustments = Vec::new();
    if let Some(line) = lines.rest() {
        if line.tokens.len() != 1 {
            return Err(err(line.no, line.col(1), "expected the capacity adjustment count"));
        }
        let n: u64 = line.num(0, "adjustment count")?;
        lines.next += 1;
        for _ in 0..n {
            let al = lines.next("capacity adjustment")?;
            al.expect_len(7, "capacity adjustment")?;
            let v: Vec<u32> = (0..7).map(|i| al.num(i, "adjustment field")).collect::<Result<_, _>>()?;
            let (from, to) = ((v[0], v[1], v[2]), (v[3], v[4], v[5]));
            for (i, (x, y, l)) in [(0, from), (3, to)] {
                if x >= nx || y >= ny || l == 0 || l > layers {
                    return Err(err(al.no, al.col(i), "adjustment endpoint is outside the grid"));
                }
            }
            let dx = from.0.abs_diff(to.0);
            let dy = from.1.abs_diff(to.1);
            let dl = from.2.abs_diff(to.2);
            if dx + dy + dl != 1 {
                return Err(err(al.no, al.col(0), "adjustment endpoints are not adjacent"));
            }
            if dl == 0 {
                let l = from.2 as usize - 1;
                let horizontal = dirs[l] == LayerDir::Horizontal;
                if horizontal != (dx == 1) {
                    return Err(err(al.no, al.col(0), format!("adjustment runs against the direction of layer {}", from.2)));
                }
            }
            adjustments.push(Adjustment { from, to, capacity: v[6] });
        }
    }
    if let Some(extra) = lines.rest() {
        return Err(err(
            extra.no,
            extra.col(0),
            format!("unexpected content after {} nets and {} adjustments", declared, adjustments.len()),
        ));
    }

    Ok(Benchmark {
        name: String::new(),
        nx,
        ny,
        layers,
        vertical_caps,
        horizontal_caps,
        min_width,
        min_spacing,
        via_spacing,
        origin,
        tile,
        nets,
        adjustments,
    })
}
