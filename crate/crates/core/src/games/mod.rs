//! Congestion, network congestion and network coordination games.

pub mod congestion;
pub mod coordination;
pub mod network;

pub use congestion::{
    accumulated_monomial, better_response_dynamics, restrained_bounds, CongestionGame, CostModel, GameStep,
    GameTrace, Profile, ResponseRule, RestrainedBounds,
};
pub use coordination::{coordination_bound, coordination_dynamics, NetworkCoordinationGame};
pub use network::{
    compactness_desk, is_network_pne, network_best_response, pure_equilibria, shortest_path_dynamics,
    undominated_paths, Compactness, NetworkCongestionGame, NetworkTrace, Path,
};
