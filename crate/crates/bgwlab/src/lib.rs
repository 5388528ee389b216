//! Exact and Monte-Carlo laboratory for Bienaymé–Galton–Watson trees
//! conditioned on their total size together with either a fixed number of
//! leaves or a fixed number of internal nodes.
//!
//! The crate provides, for several offspring-weight families:
//!
//! * plane-tree combinatorics (Łukasiewicz coding, both reduced-tree
//!   decompositions, exhaustive enumeration oracles),
//! * exact conditional laws of the reduced tree, the sorted outdegree
//!   vector and per-vertex leaf totals, computed in scaled-rational
//!   arithmetic via truncated power series,
//! * exact-in-distribution samplers for the biconditioned trees plus the
//!   limit objects they converge to, and
//! * a verification harness (total variation, chi-square, Kolmogorov–
//!   Smirnov, convergence sweeps) tying samples to the exact laws.

pub mod cli;
pub mod dist;
pub mod offspring;
pub mod sample;
pub mod scalar;
pub mod series;
pub mod tree;
pub mod verify;

pub use dist::{IntSeqDist, TreeDist};
pub use offspring::OffspringWeights;
pub use sample::RngStream;
pub use scalar::{LogWeight, ScaledRat, Scalar};
pub use tree::PlaneTree;

/// Truncated series with exact scaled-rational coefficients.
pub type ExactSeries = series::TruncSeries<ScaledRat>;
/// Truncated series with log-space floating coefficients.
pub type LogSeries = series::TruncSeries<LogWeight>;
