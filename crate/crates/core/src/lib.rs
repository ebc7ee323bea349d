//! Community detection with the Constant Potts Model, treated as a hedonic
//! game in which every node chooses its community.
//!
//! A partition of a graph into `K` community slots is scored at resolution
//! `γ ∈ [0, 1]` by
//!
//! ```text
//! Φ(π) = Σ_k [ m_k - γ · C(n_k, 2) ]
//! ```
//!
//! where `m_k` is the number of edges inside community `k` and `n_k` its size.
//! The gain of a node that changes community equals the change in `Φ`, so
//! `Φ` is an exact potential and any sequence of strictly improving moves
//! ends in an equilibrium. With `γ = b/c` rational, all arithmetic here is
//! done in integer units of `1/c`.
//!
//! The crate provides:
//!
//! * [`Graph`] and [`Partition`] with the degree counts `d` (neighbors) and
//!   `d̂` (non-neighbors) of a node within a community;
//! * potentials and exact move gains in [`potential`];
//! * better- and best-response [`dynamics`], plus the one-pass and mirror
//!   baselines;
//! * per-node [`robustness`], move classification and the exact range of `γ`
//!   for which a partition is an equilibrium;
//! * a brute-force [`metagraph`] of all partitions of graphs with at most ten
//!   nodes;
//! * a planted-partition generator ([`synthgen`]), the adjusted Rand index
//!   ([`metrics`]) and a parallel benchmark sweep ([`experiment`]).
//!
//! ```
//! use hedonic::{equilibrium_gamma_range, run_dynamics, DynamicsConfig, Graph, Partition, Resolution};
//!
//! let g = Graph::parse_edge_list("0 1\n0 2\n0 3\n1 2", None)?;
//! let start = Partition::singletons(4);
//! let gamma: Resolution = "1/10".parse()?;
//! let (end, _) = run_dynamics(&g, &start, gamma, &DynamicsConfig::default())?;
//! assert_eq!(end.to_string(), "{0,1,2,3}");
//! assert_eq!(equilibrium_gamma_range(&g, &end)?.to_string(), "0/1 .. 1/3");
//! # Ok::<(), hedonic::Error>(())
//! ```

pub mod dynamics;
mod error;
pub mod experiment;
pub mod graph;
pub mod metagraph;
pub mod metrics;
pub mod partition;
pub mod potential;
pub mod resolution;
pub mod robustness;
pub mod synthgen;

pub use dynamics::{
    apply_move, find_improving_move, is_equilibrium, mirror, one_pass, run_dynamics, DynamicsConfig, NodeRule,
    QueueInit, RunStats, Selection, Stability, Step, TieBreak,
};
pub use error::{Error, Result};
pub use experiment::{detect, run_grid, ExperimentGrid, Method};
pub use graph::{edge_density, Graph};
pub use metagraph::{build_metagraph, enumerate_partitions, orient, sinks, MetaGraph, SetPartition};
pub use metrics::{ari, ExperimentRecord};
pub use partition::{community_stats, degrees_in, DegreePair, Partition};
pub use potential::{move_gain, node_potential, pair_value, partition_potential, MoveDeltas, MoveGain};
pub use resolution::{Resolution, ScaledValue};
pub use robustness::{
    classify_move, equilibrium_gamma_range, familiarity, is_fully_robust, node_is_robust, partition_robustness,
    Familiarity, GammaInterval, MoveClass, RobustnessReport,
};
pub use synthgen::{generate, perturb, NoiseSpec, SappmSpec};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/potential.md")]
    mod potential {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/robustness.md")]
    mod robustness {}
    #[doc = include_str!("../../../book/src/metagraph.md")]
    mod metagraph {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
