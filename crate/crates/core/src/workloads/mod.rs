//! Benchmark problems in Ising form, plus an exhaustive oracle.

pub mod assets;
pub mod brute;
pub mod image;
pub mod ingest;
pub mod kings;
pub mod tsp;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ising::{resolution_range, GraphError, IsingGraph};

pub use assets::{AssetAllocation, AssetError, AssetForm};
pub use brute::{brute_force_ground, Ground, TooManySpins, MAX_BRUTE_SPINS};
pub use image::{cut_from_hamiltonian, cut_value, Connectivity, ImageError, ImageSegmentation};
pub use kings::{kings_edge_count, kings_graph, lattice_dims, CouplingSource, MolecularDynamics};
pub use tsp::{tsp_decision, TspDecision, TspError};

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error(transparent)]
    Asset(#[from] AssetError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Tsp(#[from] TspError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("benchmark needs at least 2 spins")]
    TooSmall,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    Assets,
    Image,
    Tsp,
    Molecular,
}

impl Benchmark {
    pub const ALL: [Benchmark; 4] = [
        Benchmark::Assets,
        Benchmark::Image,
        Benchmark::Tsp,
        Benchmark::Molecular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Assets => "assets",
            Benchmark::Image => "image",
            Benchmark::Tsp => "tsp",
            Benchmark::Molecular => "molecular",
        }
    }

    /// A seeded instance with about `spins` spins at resolution `r`. Lattice
    /// benchmarks round up to a near-square grid.
    pub fn generate(self, spins: usize, r: u32, seed: u64) -> Result<IsingGraph, WorkloadError> {
        crate::ising::graph::check_resolution(r)?;
        if spins < 2 {
            return Err(WorkloadError::TooSmall);
        }
        let graph = match self {
            Benchmark::Assets => {
                AssetAllocation::random(spins, exact_asset_max(r), seed)
                    .to_ising(r, AssetForm::Complete)?
            }
            Benchmark::Image => {
                let (h, w) = lattice_dims(spins);
                ImageSegmentation::two_region(w, h, seed).to_ising(r, Connectivity::Four)?
            }
            Benchmark::Tsp => TspDecision::random(spins, r, seed).to_ising(r)?.0,
            Benchmark::Molecular => {
                let (h, w) = lattice_dims(spins);
                kings_graph(h, w, r, CouplingSource::Random { seed })?
            }
        };
        Ok(graph)
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown benchmark `{s}`"))
    }
}

/// Largest asset value whose pairwise products fit exactly at resolution `r`.
pub fn exact_asset_max(r: u32) -> u64 {
    let limit = 1u64 << (r - 1);
    let root = (limit as f64).sqrt().floor() as u64;
    root.clamp(1, resolution_range(r).1 as u64)
}

/// Erdos-Renyi couplings plus fields on about half the spins.
pub fn random_graph(n: usize, r: u32, density: f64, seed: u64) -> IsingGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = resolution_range(r);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density.clamp(0.0, 1.0)) {
                edges.push((i, j, kings::draw_coupling(&mut rng, r)));
            }
        }
    }
    let fields = (0..n)
        .map(|_| if rng.random_bool(0.5) { rng.random_range(lo..=hi) } else { 0 })
        .collect();
    IsingGraph::from_parts(n, r, fields, edges).expect("generated within range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_respect_invariants() {
        for b in Benchmark::ALL {
            for r in [2, 4, 8] {
                let g = b.generate(30, r, 5).unwrap();
                let (lo, hi) = resolution_range(r);
                assert!(g.num_spins() >= 30, "{b}");
                assert!(g.edges().iter().all(|e| e.i < e.j && (lo..=hi).contains(&e.weight)));
                assert!(g.edges().windows(2).all(|w| (w[0].i, w[0].j) < (w[1].i, w[1].j)));
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for b in Benchmark::ALL {
            assert_eq!(b.name().parse::<Benchmark>().unwrap(), b);
        }
        assert!("chess".parse::<Benchmark>().is_err());
    }

    #[test]
    fn asset_max() {
        assert_eq!(exact_asset_max(2), 1);
        assert_eq!(exact_asset_max(8), 11);
        assert_eq!(exact_asset_max(16), 181);
    }

    #[test]
    fn random_graph_is_seeded() {
        assert_eq!(random_graph(10, 4, 0.5, 1), random_graph(10, 4, 0.5, 1));
        assert_ne!(random_graph(10, 4, 0.5, 1), random_graph(10, 4, 0.5, 2));
    }
}
