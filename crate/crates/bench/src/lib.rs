// SPDX-License-Identifier: Apache-2.0

//! Shared inputs for the benchmarks.

use routevolve::eval::Design;
use routevolve::io::{emit_benchmark, generate, SynthParams};

/// Synthetic congested design, as benchmark text and as a routable design.
pub fn congested() -> (String, Design) {
    synth(&SynthParams::congested())
}

/// The larger synthetic design.
pub fn large() -> (String, Design) {
    synth(&SynthParams::large())
}

fn synth(p: &SynthParams) -> (String, Design) {
    let b = generate(p);
    let design = b.to_design().expect("synthetic designs are valid");
    (emit_benchmark(&b), design)
}

/// A strategy exercising every routing stage.
pub const RICH_STRATEGY: &str = "cost = base_len + 10 * overflow_excess + 2 * history
grid = 3 1 1
grid = full
order = hpwl-asc
pass = pulse 0.3
pass = rebalance
pattern = L
pattern = Z
rrr_rounds = 8
seed = 0
soft_reserve = 0.1
";
