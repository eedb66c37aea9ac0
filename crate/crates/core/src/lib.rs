// SPDX-License-Identifier: Apache-2.0

//! Evolvable global routing with a detailed-routing proxy, Pareto selection
//! and a mutation-driven search loop.

pub mod eval;
pub mod evolve;
pub mod grid;
pub mod io;
pub mod mutate;
pub mod pareto;
pub mod report;
pub mod router;
pub mod topology;

pub use grid::{Coord, Edge, EdgeKind, GcellGrid, GridError, GridSpec, LayerDir, Net, Overflow, QorVector, RouteTree};
pub use router::{route_all, RouterError, RouterStrategy, RoutingStats, StrategyDoc};
