//! Toolkit for counting graphs that share a local-structure histogram.
//!
//! Given a small rooted pattern F, every vertex of a graph has an F-degree:
//! the number of copies of F rooted there. The empirical distribution of
//! normalized F-degrees is the graph's F-degree distribution, and the set of
//! n-vertex graphs whose distribution lies within KS distance delta of a
//! reference is the histogram ball. This crate computes those distributions,
//! reduces histogram membership to a vector of subgraph-density constraints,
//! bounds the ball's size through a constrained maximum-entropy problem over
//! k-vertex edge-probability matrices, and verifies every finite-n claim
//! against brute-force enumeration at small n.
//!
//! Start with the runnable examples (`cargo run --example ...`) or the
//! `histograph` binary for the file-driven CLI.

pub mod bounds;
pub mod coeffs;
pub mod counting;
pub mod dist;
pub mod error;
pub mod graph;
pub mod io;
pub mod jacobian;
pub mod maxent;
pub mod oracle;
pub mod pattern;
pub mod radii;
pub mod szemeredi;
pub mod typedensity;

pub use error::{Error, Result};
pub use graph::Graph;
pub use pattern::RootedPattern;
