// SPDX-License-Identifier: Apache-2.0

//! Seeded provider drawing one to three edits from a fixed menu.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{MutationContext, MutationError, Patch, Proposal, Provider};
use crate::router::expr::BinOp;
use crate::router::{Expr, GridCandidate, OrderPolicy, PatternShape, PostPass, RouterStrategy, Var};

pub const MAX_SCRIPTED_GRIDS: usize = 6;
pub const MAX_SCRIPTED_PASSES: usize = 4;
const DIVISORS: [u32; 5] = [2, 3, 4, 6, 8];
const SCALES: [f64; 4] = [0.5, 0.75, 1.5, 2.0];
const RESERVES: [f64; 4] = [0.0, 0.05, 0.1, 0.2];
const ROUNDS: [u32; 5] = [4, 6, 8, 12, 16];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Move {
    ScaleConstant,
    AddTerm,
    DropTerm,
    TogglePattern,
    AddGrid,
    RemoveGrid,
    InsertPass,
    RemovePass,
    SwapPasses,
    Order,
    Reserve,
    Rounds,
    Reseed,
}

/// Menu entries with their relative weights.
const MENU: [(Move, u32); 13] = [
    (Move::ScaleConstant, 4),
    (Move::AddTerm, 2),
    (Move::DropTerm, 1),
    (Move::TogglePattern, 3),
    (Move::AddGrid, 4),
    (Move::RemoveGrid, 2),
    (Move::InsertPass, 3),
    (Move::RemovePass, 1),
    (Move::SwapPasses, 1),
    (Move::Order, 2),
    (Move::Reserve, 1),
    (Move::Rounds, 1),
    (Move::Reseed, 2),
];

#[derive(Clone, Debug)]
pub struct ScriptedProvider {
    pub seed: u64,
}

impl ScriptedProvider {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn rng(&self, ctx: &MutationContext) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(ctx.iteration.to_le_bytes());
        h.update(ctx.attempt.to_le_bytes());
        h.update(ctx.current_id.as_bytes());
        ChaCha8Rng::from_seed(h.finalize().into())
    }
}

fn pick_move(rng: &mut ChaCha8Rng) -> Move {
    let total: u32 = MENU.iter().map(|(_, w)| w).sum();
    let mut r = rng.gen_range(0..total);
    for (m, w) in MENU {
        if r < w {
            return m;
        }
        r -= w;
    }
    unreachable!("weights cover the range")
}

/// Top-level summands of an expression.
fn terms(e: &Expr) -> Vec<Expr> {
    match e {
        Expr::Bin(BinOp::Add, a, b) => {
            let mut v = terms(a);
            v.extend(terms(b));
            v
        }
        other => vec![other.clone()],
    }
}

fn sum(terms: Vec<Expr>) -> Expr {
    terms.into_iter().reduce(|a, b| Expr::bin(BinOp::Add, a, b)).expect("at least one term")
}

/// Applies one menu move; `None` when it does not apply to `s`.
fn apply_move(m: Move, s: &RouterStrategy, rng: &mut ChaCha8Rng) -> Option<(RouterStrategy, String)> {
    let mut n = s.clone();
    let note = match m {
        Move::ScaleConstant => {
            let count = n.cost.constants().len();
            if count == 0 {
                return None;
            }
            let i = rng.gen_range(0..count);
            let k = *SCALES.choose(rng).unwrap();
            let v = n.cost.constants()[i] * k;
            n.cost.set_constant(i, v);
            format!("scale cost constant {i} by {k}")
        }
        Move::AddTerm => {
            let var = *Var::ALL.choose(rng).unwrap();
            let c = *[0.5, 1.0, 2.0, 5.0].choose(rng).unwrap();
            let term = Expr::bin(BinOp::Mul, Expr::Const(c), Expr::Var(var));
            n.cost = Expr::bin(BinOp::Add, n.cost.clone(), term);
            format!("add {c} * {} to cost", var.name())
        }
        Move::DropTerm => {
            let mut t = terms(&n.cost);
            if t.len() < 2 {
                return None;
            }
            let i = rng.gen_range(0..t.len());
            let gone = t.remove(i);
            n.cost = sum(t);
            format!("drop cost term {gone}")
        }
        Move::TogglePattern => {
            let p = *PatternShape::ALL.choose(rng).unwrap();
            if n.patterns.contains(&p) {
                if n.patterns.len() == 1 {
                    return None;
                }
                n.patterns.remove(&p);
                format!("disable {} patterns", p.name())
            } else {
                n.patterns.insert(p);
                format!("enable {} patterns", p.name())
            }
        }
        Move::AddGrid => {
            if n.grid_candidates.len() >= MAX_SCRIPTED_GRIDS {
                return None;
            }
            let g = GridCandidate::new(*DIVISORS.choose(rng).unwrap(), rng.gen_range(0..2), rng.gen_range(0..2));
            if n.grid_candidates.contains(&g) {
                return None;
            }
            n.grid_candidates.push(g);
            format!("add grid candidate {} {} {}", g.divisor, g.offset.0, g.offset.1)
        }
        Move::RemoveGrid => {
            if n.grid_candidates.len() < 2 {
                return None;
            }
            let i = rng.gen_range(0..n.grid_candidates.len());
            n.grid_candidates.remove(i);
            format!("remove grid candidate {i}")
        }
        Move::InsertPass => {
            if n.post_passes.len() >= MAX_SCRIPTED_PASSES {
                return None;
            }
            let p = match rng.gen_range(0..3) {
                0 => PostPass::Pulse { top_fraction: *[0.1, 0.2, 0.3, 0.5].choose(rng).unwrap() },
                1 => PostPass::Rebalance,
                _ => PostPass::Compaction { min_hp: *[20.0, 50.0, 100.0].choose(rng).unwrap(), divisor: *[8, 16].choose(rng).unwrap() },
            };
            let at = rng.gen_range(0..=n.post_passes.len());
            n.post_passes.insert(at, p);
            format!("insert pass `{p}` at {at}")
        }
        Move::RemovePass => {
            if n.post_passes.is_empty() {
                return None;
            }
            let i = rng.gen_range(0..n.post_passes.len());
            let p = n.post_passes.remove(i);
            format!("remove pass `{p}`")
        }
        Move::SwapPasses => {
            if n.post_passes.len() < 2 {
                return None;
            }
            let i = rng.gen_range(0..n.post_passes.len() - 1);
            n.post_passes.swap(i, i + 1);
            format!("swap passes {i} and {}", i + 1)
        }
        Move::Order => {
            let o = *OrderPolicy::ALL.choose(rng).unwrap();
            n.order = o;
            format!("order nets by {}", o.name())
        }
        Move::Reserve => {
            n.soft_reserve = *RESERVES.choose(rng).unwrap();
            format!("soft reserve {}", n.soft_reserve)
        }
        Move::Rounds => {
            n.rrr_max_rounds = *ROUNDS.choose(rng).unwrap();
            format!("rip-up rounds {}", n.rrr_max_rounds)
        }
        Move::Reseed => {
            n.seed = rng.gen_range(1..1u64 << 32);
            format!("reseed {}", n.seed)
        }
    };
    (n != *s && n.validate().is_ok()).then_some((n, note))
}

impl Provider for ScriptedProvider {
    fn propose(&mut self, ctx: &MutationContext) -> Result<Proposal, MutationError> {
        let current = RouterStrategy::parse(&ctx.current_doc).map_err(|e| MutationError::Failed(format!("current document: {e}")))?;
        let mut rng = self.rng(ctx);
        let edits = rng.gen_range(1..=3);
        let mut next = current.clone();
        let mut notes = Vec::new();
        let mut tries = 0;
        while notes.len() < edits && tries < 64 {
            tries += 1;
            if let Some((n, note)) = apply_move(pick_move(&mut rng), &next, &mut rng) {
                next = n;
                notes.push(note);
            }
        }
        if next == current {
            next.seed = next.seed.wrapping_add(1);
            notes.push(format!("reseed {}", next.seed));
        }
        let old: Vec<&str> = ctx.current_doc.lines().collect();
        let text = next.to_text();
        let new: Vec<&str> = text.lines().collect();
        Ok(Proposal { patch: Patch::between(&old, &new), summary: notes.join("; ") })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{QorRecord, Status};
    use crate::pareto::ObjectiveSpec;
    use crate::router::StrategyDoc;

    pub(crate) fn context(iteration: u32, doc: &StrategyDoc) -> MutationContext {
        let baseline = QorRecord::failed(0, doc.id(), Status::Ok, "");
        MutationContext {
            iteration,
            attempt: 0,
            objectives: ObjectiveSpec::default(),
            baseline: baseline.clone(),
            history: vec![baseline],
            version_log: vec![],
            current_id: doc.id(),
            current_doc: doc.text().to_string(),
            errors: vec![],
        }
    }

    #[test]
    fn same_context_and_seed_give_the_same_patch() {
        let ctx = context(3, &StrategyDoc::baseline());
        let a = ScriptedProvider::new(7).propose(&ctx).unwrap();
        let b = ScriptedProvider::new(7).propose(&ctx).unwrap();
        assert_eq!(a, b);
        let c = ScriptedProvider::new(8).propose(&ctx).unwrap();
        assert_ne!(a.patch, c.patch);
    }

    #[test]
    fn every_proposal_over_many_seeds_validates() {
        let mut doc = StrategyDoc::baseline();
        for seed in 0..100 {
            let ctx = context(1 + seed as u32 % 5, &doc);
            let p = ScriptedProvider::new(seed).propose(&ctx).unwrap();
            let applied = p.patch.apply(&doc).unwrap();
            applied.strategy.validate().unwrap();
            assert_ne!(applied.doc, doc, "seed {seed} proposed a no-op");
            assert!(!p.summary.is_empty());
            // Walk forward so later proposals start from richer documents.
            doc = applied.doc;
        }
    }
}
