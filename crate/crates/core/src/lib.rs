//! Vacant-set simulation and exact analysis for lazy random walks on
//! high-degree regular graphs.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] and [`multigraph`]: hypercubes, random regular graphs,
//!   distances, and contraction of a vertex set to a single vertex.
//! * [`walk`]: lazy and speedy trajectories with push-based observers.
//! * [`chain`]: exact transition kernels, return sums, taboo probabilities,
//!   spectra, mixing times and the gambler's-ruin formula.
//! * [`vacant`]: visited bitmaps, component censuses of the vacant set and
//!   phase scans around `t* = n ln d`.
//! * [`estimate`]: Monte Carlo estimators paired with the exact routines.
//! * [`properties`]: checks of the expansion properties P1–P4.

pub mod chain;
pub mod error;
pub mod estimate;
pub mod graph;
pub mod multigraph;
pub mod properties;
pub mod rng;
pub mod union_find;
pub mod vacant;
pub mod vertex_set;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{Distance, Graph, GraphKind, WalkGraph};
pub use multigraph::MultiGraph;
pub use vertex_set::VertexSet;
pub use walk::WalkMode;
