//! Community detection on weighted undirected graphs under a per-community
//! minimum-volume constraint.
//!
//! The optimizer maximizes modularity subject to the requirement that the
//! total volume carried by the special vertices of every community strictly
//! exceeds a threshold. The constraint enters as a penalty on a Potts-model
//! Hamiltonian whose Boltzmann conditionals drive a Gibbs sampler; local
//! optimization alternates with graph folding, which contracts communities
//! into single vertices while preserving both modularity and feasibility.
//!
//! The core is generic over the floating-point scalar through [`Scalar`];
//! concrete `f64` aliases are exported at the crate root. Exact partition
//! combinatorics (Stirling numbers, feasible-space counts, brute-force
//! oracles) use arbitrary-precision integers.

pub mod analysis;
pub mod assignment;
pub mod combinatorics;
pub mod error;
pub mod generator;
pub mod graph;
pub mod io;
pub mod objective;
pub mod optimizer;
pub mod sampler;
pub mod scalar;

pub use assignment::Assignment;
pub use error::{Error, Result};
pub use graph::{fold, FoldMap, VertexVolumes, WeightedGraph};
pub use objective::PenaltyContext;
pub use optimizer::{
    constrained_optimize, default_tau, run_ensemble, OptimizerConfig, PenaltySchedule,
};
pub use sampler::{chain_rng, local_optimize, CoolingSchedule, SamplerOptions};
pub use scalar::Scalar;

/// Double-precision graph, the type the CLI works with.
pub type Graph64 = WeightedGraph<f64>;
/// Single-precision graph.
pub type Graph32 = WeightedGraph<f32>;
pub type PenaltyContext64 = PenaltyContext<f64>;
pub type CoolingSchedule64 = CoolingSchedule<f64>;
pub type OptimizerConfig64 = OptimizerConfig<f64>;
pub type ChainTrace64 = optimizer::ChainTrace<f64>;
pub type EnsembleResult64 = optimizer::EnsembleResult<f64>;
