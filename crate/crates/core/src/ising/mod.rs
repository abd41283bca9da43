//! Functional Ising solver: graphs, energies, local updates and annealing.

pub mod anneal;
pub mod format;
pub mod graph;
pub mod solve;
mod spin;

pub use anneal::{
    acceptance_likelihood, anneal_accept, default_init_temp, spin_rng, spin_update, sweep_update,
    temperature, AnnealConfig, ConfigError, SweepMode, SweepOutcome,
};
pub use format::{load_graph, parse_graph, render_graph, store_graph, FormatError};
pub use graph::{
    hamiltonian_of, local_field_of, resolution_range, Couplings, Edge, GraphError, GraphStats,
    IsingGraph,
};
pub use solve::{solve, solve_with, ReferenceEngine, SolveResult, SweepEngine};
pub use spin::Spin;
