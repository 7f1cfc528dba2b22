//! Curriculum training for signed graph neural networks.
//!
//! Edges are scored by how many unbalanced triangles they sit in, sorted
//! easy-to-hard, and fed to a two-channel signed GNN through a pacing
//! function. The [`wl`] module contains an executable check of why edges in
//! unbalanced cycles are hard for message-passing models.

pub mod census;
pub mod curriculum;
pub mod error;
pub mod eval;
pub mod graph;
pub mod sgnn;
pub mod wl;

pub use error::{Error, Result};
pub use graph::{NodeId, Sign, SignedEdge, SignedGraph};
