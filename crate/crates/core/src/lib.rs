//! Exact longest simple path solving by partition-based dynamic programming.
//!
//! The solver partitions the graph into a hierarchy of blocks, tabulates for
//! every block the longest ways to connect its boundary vertices by disjoint
//! internal paths, and combines those tables level by level up to the root.

pub mod bench;
pub mod generate;
pub mod graph;
pub mod oracle;
pub mod partition;
pub mod rng;
pub mod solver;

pub use graph::{Graph, Instance, Vertex, Weight};
pub use oracle::{Solution, Status};
