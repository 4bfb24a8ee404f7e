//! Graph diffusion with the doubly stochastic graph matrix `B = (I + L)^{-1}`.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`], [`generators`], [`algorithms`]: CSR graphs, seeded random
//!   models, BFS distances and Brandes betweenness.
//! - [`dense`]: the small row-major matrix type used by the dense oracles.
//! - [`operators`]: the exact inverse, truncated Neumann operator `B_K`,
//!   mass-compensated `B̂_K`, residual mass and streaming propagation.
//! - [`spectral`]: Laplacian and DSM spectra, exact and empirical gaps.
//! - [`analysis`]: error, rank, decay, energy and centrality reports.

pub mod algorithms;
pub mod analysis;
pub mod dense;
pub mod error;
pub mod generators;
pub mod graph;
pub mod operators;
pub mod rng;
pub mod spectral;

pub use algorithms::{betweenness, bfs_distances, UNREACHABLE};
pub use analysis::{
    CentralityReport, DecayProfile, EnergyTrajectory, OperatorKind, RankReport, VerificationReport,
};
pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use generators::{generate_graph, GraphModel};
pub use graph::{build_graph, Graph};
pub use operators::{
    compensated_dsm, error_bound, exact_dsm, propagate, propagate_with, residual_mass,
    truncated_dsm, Execution, Mode, OracleCap, ResidualMass, TransitionOperator,
};
pub use spectral::SpectrumReport;
