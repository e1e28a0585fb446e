//! Solvers for the single-facility minmax-regret maximal covering location
//! problem on networks with demand distributed along the edges.
//!
//! The demand intensity on each edge is unknown; only lower and upper bound
//! functions are given (constant or linear per edge). The crate provides
//! exact polynomial solvers for both uncertainty models, node-restricted and
//! deterministic baselines, a brute-force grid oracle, instance file formats
//! and a benchmark harness.

pub mod baselines;
pub mod bench;
pub mod breakpoints;
pub mod constant;
pub mod coverage;
pub mod envelope;
pub mod error;
pub mod instance;
pub mod linear;
pub mod net;
pub mod oracle;
pub mod poly;
pub mod pwl;

pub use error::{Error, Result};
pub use net::{EdgeId, Network, NodeId, PointOnEdge, Subedge, EPS};
