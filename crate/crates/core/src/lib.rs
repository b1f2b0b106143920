//! ER-perturbed random geometric graphs.
//!
//! A random geometric graph `G*` is sampled from a metric space (unit cube or
//! flat torus), then perturbed by deleting each edge with probability `p` and
//! inserting each non-edge with probability `q`. This crate generates such
//! graphs with full edge provenance, computes exact edge clique numbers,
//! filters the observed graph by a clique (or Jaccard) threshold, and measures
//! how well the filtered graph's shortest-path metric approximates the hidden
//! one. Closed-form calculators for the relevant clique-count expectations and
//! tail bounds live in [`bounds`].

pub mod bitgraph;
pub mod bounds;
pub mod cliques;
pub mod error;
pub mod filtering;
pub mod graphgen;
pub mod metrics;
pub mod oracle;
pub mod partitions;
pub mod rng;
pub mod space;

pub use bitgraph::BitGraph;
pub use error::{Error, Result};
pub use graphgen::{EdgeLabel, GeometricGraph, PerturbedGraph, Provenance};
pub use space::{MassBounds, MetricSpace, PointCloud, SpaceKind};
