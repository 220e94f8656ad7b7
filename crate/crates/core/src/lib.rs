//! Carbon leakage in a regionally priced European power system.
//!
//! A greenfield capacity-expansion and dispatch model over eleven regions,
//! a GDP-indexed carbon price, flow tracing by average participation and
//! the accounting that attributes emissions, costs and rents to regions.
pub mod formulation;
pub mod lp;
pub mod metrics;
pub mod model;
pub mod pricing;
pub mod solver;
pub mod sweep;
pub mod tracing;
