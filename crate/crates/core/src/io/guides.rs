// SPDX-License-Identifier: Apache-2.0

//! Route guides: one block per net listing its GCell edges.
//!
//! ```text
//! # routevolve guides v1
//! n0 2
//! 0 1 1 1 1 1
//! 1 1 1 2 1 1
//! !
//! ```
//!
//! Edge lines are `x1 y1 l1 x2 y2 l2` with 1-based layers, low endpoint
//! first, sorted ascending.

use std::fmt::Write as _;

use crate::grid::{GridError, Net};

pub const GUIDES_HEADER: &str = "# routevolve guides v1";

pub fn emit_guides(nets: &[Net]) -> Result<String, GridError> {
    let mut out = String::new();
    writeln!(out, "{GUIDES_HEADER}").unwrap();
    for net in nets {
        let tree = net.route.as_ref().ok_or_else(|| GridError::NotRouted(net.id.clone()))?;
        writeln!(out, "{} {}", net.id, tree.edges.len()).unwrap();
        for e in &tree.edges {
            let (a, b) = (e.low(), e.high());
            writeln!(out, "{} {} {} {} {} {}", a.x, a.y, a.layer + 1, b.x, b.y, b.layer + 1).unwrap();
        }
        out.push_str("!\n");
    }
    Ok(out)
}
