//! Combinatorial local optimization (CLO) under smoothed costs.
//!
//! A CLO instance has configurations with an integral cost part and a
//! binary non-cost part, a linear cost `c · s•`, and a neighborhood oracle.
//! This crate provides the abstract model, smoothed cost sampling,
//! covering certification with the resulting iteration bound, standard local
//! search with pluggable pivot rules, brute-force oracles for desk-scale
//! instances, encoders for congestion games and classic local search problems,
//! and constructive reductions between them.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod clo;
pub mod combinatorial;
pub mod covering;
pub mod engine;
mod error;
pub mod games;
pub mod gen;
pub mod oracle;
pub mod problem;
pub mod reductions;
pub mod smoothing;
mod util;

pub use clo::{
    cost, improving_neighbors, is_local_optimum, CloDims, CloInstance, Configuration, CostVector,
    ExplicitNeighborhood, Neighborhood, Sense, Transition,
};
pub use covering::{
    certify, check_diversity_product, diversity, iteration_bound, BoundValue, Certificate,
    ClusterResolver, CoordinateCluster, Covering, SeparabilityParams, TransitionCluster,
    Violation,
};
pub use engine::{run, run_all_starts, PivotKind, PivotRule, RunStatus, SearchTrace};
pub use error::{Error, Result};
pub use oracle::{
    build_transition_graph, enumerate_configurations, longest_improving_path, verify_sinks,
    EnumBudget, NeighborhoodGraph, TransitionGraph,
};
pub use problem::{encode_problem, CloEncoder, Encoded, LocalProblem};
pub use smoothing::{fit_window, anticoncentration_check, DensityKind, Interval, PhiDensity, SmoothedCostModel};
pub use util::{derive_seed, Rng64};
