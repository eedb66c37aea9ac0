// SPDX-License-Identifier: Apache-2.0

//! The evolvable router program and its canonical text form.
//!
//! A strategy document has one `key = value` declaration per line. Keys are
//! emitted in sorted order; repeated keys (`grid`, `pass`, `pattern`) keep
//! their relative order, which is significant for `grid` and `pass`.
//! Blank lines and lines starting with `#` are ignored when parsing.
//!
//! ```text
//! cost = base_len + 10 * overflow_excess + history
//! grid = full
//! order = hpwl-asc
//! pass = pulse 0.25
//! pattern = L
//! rrr_rounds = 8
//! seed = 0
//! soft_reserve = 0
//! ```

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::expr::Expr;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("strategy line {line}: {message}")]
pub struct StrategyError {
    /// 1-based; 0 when the error is not tied to a line.
    pub line: usize,
    pub message: String,
}

impl StrategyError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderPolicy {
    HpwlAsc,
    HpwlDesc,
    PinCountDesc,
    Id,
}

impl OrderPolicy {
    pub const ALL: [OrderPolicy; 4] = [OrderPolicy::HpwlAsc, OrderPolicy::HpwlDesc, OrderPolicy::PinCountDesc, OrderPolicy::Id];

    pub fn name(self) -> &'static str {
        match self {
            OrderPolicy::HpwlAsc => "hpwl-asc",
            OrderPolicy::HpwlDesc => "hpwl-desc",
            OrderPolicy::PinCountDesc => "pin-count-desc",
            OrderPolicy::Id => "id",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternShape {
    L,
    Z,
    ThreeBend,
}

impl PatternShape {
    pub const ALL: [PatternShape; 3] = [PatternShape::L, PatternShape::Z, PatternShape::ThreeBend];

    pub fn name(self) -> &'static str {
        match self {
            PatternShape::L => "L",
            PatternShape::Z => "Z",
            PatternShape::ThreeBend => "3bend",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

/// Sparse maze-routing lattice: every `ceil(hp / divisor)`-th row and column,
/// shifted by `offset`. Divisor 0 denotes the full-resolution lattice and is
/// written as `grid = full`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridCandidate {
    pub divisor: u32,
    pub offset: (u32, u32),
}

impl GridCandidate {
    pub const FULL: GridCandidate = GridCandidate { divisor: 0, offset: (0, 0) };

    pub fn new(divisor: u32, dx: u32, dy: u32) -> Self {
        Self { divisor, offset: (dx, dy) }
    }

    /// Row/column spacing for a net with half-perimeter `hp` GCell steps.
    pub fn spacing(&self, hp: u32) -> u32 {
        if self.divisor == 0 {
            return 1;
        }
        hp.max(1).div_ceil(self.divisor).max(1)
    }

    pub fn is_full(&self) -> bool {
        self.divisor == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PostPass {
    /// Reroute the given fraction of nets with the largest wirelength.
    Pulse { top_fraction: f64 },
    /// Rip up every net and reroute from scratch.
    Rebalance,
    /// Reroute nets whose half perimeter is at least `min_hp` on a finer grid.
    Compaction { min_hp: f64, divisor: u32 },
}

impl fmt::Display for PostPass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PostPass::Pulse { top_fraction } => write!(f, "pulse {top_fraction}"),
            PostPass::Rebalance => f.write_str("rebalance"),
            PostPass::Compaction { min_hp, divisor } => write!(f, "compaction {min_hp} {divisor}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RouterStrategy {
    pub cost: Expr,
    pub order: OrderPolicy,
    pub soft_reserve: f64,
    pub patterns: BTreeSet<PatternShape>,
    pub grid_candidates: Vec<GridCandidate>,
    pub post_passes: Vec<PostPass>,
    pub rrr_max_rounds: u32,
    pub seed: u64,
}

pub const MAX_GRID_CANDIDATES: usize = 8;
pub const MAX_POST_PASSES: usize = 8;
pub const MAX_DIVISOR: u32 = 64;
pub const MAX_RRR_ROUNDS: u32 = 64;

impl RouterStrategy {
    /// The stock starting point for evolution.
    pub fn baseline() -> Self {
        Self {
            cost: Expr::parse("base_len + 10 * overflow_excess + history").expect("baseline cost parses"),
            order: OrderPolicy::HpwlAsc,
            soft_reserve: 0.0,
            patterns: BTreeSet::from([PatternShape::L]),
            grid_candidates: vec![GridCandidate::FULL],
            post_passes: Vec::new(),
            rrr_max_rounds: 8,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        let err = |m: String| Err(StrategyError::at(0, m));
        if let Err(m) = self.cost.validate() {
            return err(format!("cost: {m}"));
        }
        if !(0.0..=1.0).contains(&self.soft_reserve) {
            return err(format!("soft_reserve {} outside [0, 1]", self.soft_reserve));
        }
        if self.patterns.is_empty() {
            return err("at least one pattern shape is required".into());
        }
        if self.grid_candidates.is_empty() {
            return err("at least one grid candidate is required".into());
        }
        if self.grid_candidates.len() > MAX_GRID_CANDIDATES {
            return err(format!("more than {MAX_GRID_CANDIDATES} grid candidates"));
        }
        for g in &self.grid_candidates {
            if g.divisor > MAX_DIVISOR {
                return err(format!("grid divisor {} outside [1, {MAX_DIVISOR}]", g.divisor));
            }
            if g.offset.0 > MAX_DIVISOR || g.offset.1 > MAX_DIVISOR {
                return err(format!("grid offset {:?} too large", g.offset));
            }
        }
        if self.post_passes.len() > MAX_POST_PASSES {
            return err(format!("more than {MAX_POST_PASSES} post passes"));
        }
        for p in &self.post_passes {
            match *p {
                PostPass::Pulse { top_fraction } if !(top_fraction > 0.0 && top_fraction <= 1.0) => {
                    return err(format!("pulse fraction {top_fraction} outside (0, 1]"));
                }
                PostPass::Compaction { min_hp, divisor } => {
                    if !(min_hp.is_finite() && min_hp >= 0.0) {
                        return err(format!("compaction min_hp {min_hp} must be non-negative"));
                    }
                    if divisor == 0 || divisor > MAX_DIVISOR {
                        return err(format!("compaction divisor {divisor} outside [1, {MAX_DIVISOR}]"));
                    }
                }
                _ => {}
            }
        }
        if self.rrr_max_rounds == 0 || self.rrr_max_rounds > MAX_RRR_ROUNDS {
            return err(format!("rrr_rounds {} outside [1, {MAX_RRR_ROUNDS}]", self.rrr_max_rounds));
        }
        Ok(())
    }

    /// Canonical document text, newline-terminated.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "cost = {}", self.cost);
        for g in &self.grid_candidates {
            if g.is_full() {
                let _ = writeln!(s, "grid = full");
            } else {
                let _ = writeln!(s, "grid = {} {} {}", g.divisor, g.offset.0, g.offset.1);
            }
        }
        let _ = writeln!(s, "order = {}", self.order.name());
        for p in &self.post_passes {
            let _ = writeln!(s, "pass = {p}");
        }
        for p in &self.patterns {
            let _ = writeln!(s, "pattern = {}", p.name());
        }
        let _ = writeln!(s, "rrr_rounds = {}", self.rrr_max_rounds);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "soft_reserve = {}", self.soft_reserve);
        s
    }

    /// Parses and validates a strategy document.
    pub fn parse(text: &str) -> Result<Self, StrategyError> {
        let mut cost = None;
        let mut order = None;
        let mut soft_reserve = None;
        let mut rrr = None;
        let mut seed = None;
        let mut patterns = BTreeSet::new();
        let mut grid_candidates = Vec::new();
        let mut post_passes = Vec::new();

        fn once<T>(slot: &mut Option<T>, v: T, line: usize, key: &str) -> Result<(), StrategyError> {
            if slot.is_some() {
                return Err(StrategyError::at(line, format!("`{key}` declared twice")));
            }
            *slot = Some(v);
            Ok(())
        }
        fn num<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T, StrategyError> {
            s.parse().map_err(|_| StrategyError::at(line, format!("bad {what} `{s}`")))
        }
        fn real(s: &str, line: usize, what: &str) -> Result<f64, StrategyError> {
            let v: f64 = num(s, line, what)?;
            if !v.is_finite() {
                return Err(StrategyError::at(line, format!("{what} must be finite")));
            }
            Ok(v)
        }

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed.split_once('=').ok_or_else(|| StrategyError::at(line, "expected `key = value`"))?;
            let key = key.trim();
            let value = value.trim();
            let words: Vec<&str> = value.split_whitespace().collect();
            match key {
                "cost" => {
                    let e = Expr::parse(value).map_err(|m| StrategyError::at(line, m))?;
                    once(&mut cost, e, line, key)?;
                }
                "order" => {
                    let p =
                        OrderPolicy::from_name(value).ok_or_else(|| StrategyError::at(line, format!("unknown order policy `{value}`")))?;
                    once(&mut order, p, line, key)?;
                }
                "soft_reserve" => once(&mut soft_reserve, real(value, line, "soft_reserve")?, line, key)?,
                "rrr_rounds" => once(&mut rrr, num::<u32>(value, line, "rrr_rounds")?, line, key)?,
                "seed" => once(&mut seed, num::<u64>(value, line, "seed")?, line, key)?,
                "pattern" => {
                    let p = PatternShape::from_name(value).ok_or_else(|| StrategyError::at(line, format!("unknown pattern `{value}`")))?;
                    if !patterns.insert(p) {
                        return Err(StrategyError::at(line, format!("pattern `{value}` listed twice")));
                    }
                }
                "grid" => {
                    let g = match words[..] {
                        ["full"] => GridCandidate::FULL,
                        [d, dx, dy] => {
                            let g = GridCandidate::new(num(d, line, "divisor")?, num(dx, line, "offset")?, num(dy, line, "offset")?);
                            if g.divisor == 0 {
                                GridCandidate::FULL
                            } else {
                                g
                            }
                        }
                        _ => return Err(StrategyError::at(line, "grid needs `full` or `divisor dx dy`")),
                    };
                    grid_candidates.push(g);
                }
                "pass" => {
                    let p = match words[..] {
                        ["pulse", f] => PostPass::Pulse { top_fraction: real(f, line, "pulse fraction")? },
                        ["rebalance"] => PostPass::Rebalance,
                        ["compaction", hp, d] => {
                            PostPass::Compaction { min_hp: real(hp, line, "min_hp")?, divisor: num(d, line, "divisor")? }
                        }
                        _ => return Err(StrategyError::at(line, format!("unknown pass `{value}`"))),
                    };
                    post_passes.push(p);
                }
                _ => return Err(StrategyError::at(line, format!("unknown key `{key}`"))),
            }
        }

        let missing = |k: &str| StrategyError::at(0, format!("missing `{k}`"));
        let s = RouterStrategy {
            cost: cost.ok_or_else(|| missing("cost"))?,
            order: order.ok_or_else(|| missing("order"))?,
            soft_reserve: soft_reserve.ok_or_else(|| missing("soft_reserve"))?,
            patterns,
            grid_candidates,
            post_passes,
            rrr_max_rounds: rrr.ok_or_else(|| missing("rrr_rounds"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
        };
        s.validate()?;
        Ok(s)
    }
}

/// Canonical strategy text. Its SHA-256 is the candidate identifier.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StrategyDoc(String);

impl StrategyDoc {
    pub fn from_strategy(s: &RouterStrategy) -> Self {
        Self(s.to_text())
    }

    /// Parses arbitrary (possibly non-canonical) text and re-serializes it.
    pub fn canonicalize(text: &str) -> Result<(Self, RouterStrategy), StrategyError> {
        let s = RouterStrategy::parse(text)?;
        Ok((Self::from_strategy(&s), s))
    }

    pub fn baseline() -> Self {
        Self::from_strategy(&RouterStrategy::baseline())
    }

    pub fn text(&self) -> &str {
        &self.0
    }

    pub fn lines(&self) -> Vec<&str> {
        self.0.lines().collect()
    }

    pub fn strategy(&self) -> Result<RouterStrategy, StrategyError> {
        RouterStrategy::parse(&self.0)
    }

    pub fn id(&self) -> String {
        content_id(self.0.as_bytes())
    }
}

/// Hex SHA-256 of `bytes`.
pub fn content_id(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
