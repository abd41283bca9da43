use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ising::{resolution_range, GraphError, IsingGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TspError {
    #[error("need at least 2 cities, got {0}")]
    TooFewCities(usize),
    #[error("distance matrix is not square")]
    NotSquare,
    #[error("distance ({i}, {j}) differs from ({j}, {i})")]
    Asymmetric { i: usize, j: usize },
    #[error("distance ({i}, {j}) = {d} must be positive and fit in {resolution} bits")]
    Distance { i: usize, j: usize, d: u64, resolution: u32 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Threshold form of the travelling salesman problem on a complete graph:
/// does the minimized Hamiltonian fall below `threshold`?
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TspDecision {
    pub distances: Vec<Vec<u64>>,
    pub threshold: i64,
}

impl TspDecision {
    pub fn num_cities(&self) -> usize {
        self.distances.len()
    }

    /// Cities uniform in a square, Euclidean distances scaled into
    /// `1..=2^(r-1)-1`.
    pub fn random(num_cities: usize, r: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(f64, f64)> = (0..num_cities)
            .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let top = resolution_range(r).1.max(1) as f64;
        let scale = top / std::f64::consts::SQRT_2;
        let distances = pts
            .iter()
            .map(|&(xa, ya)| {
                pts.iter()
                    .map(|&(xb, yb)| {
                        let d = ((xa - xb).powi(2) + (ya - yb).powi(2)).sqrt() * scale;
                        (d.round() as u64).clamp(1, top as u64)
                    })
                    .collect()
            })
            .collect();
        Self { distances, threshold: 0 }
    }

    pub fn validate(&self, r: u32) -> Result<(), TspError> {
        let n = self.num_cities();
        if n < 2 {
            return Err(TspError::TooFewCities(n));
        }
        if self.distances.iter().any(|row| row.len() != n) {
            return Err(TspError::NotSquare);
        }
        let top = resolution_range(r).1 as u64;
        for i in 0..n {
            for j in i + 1..n {
                let d = self.distances[i][j];
                if d != self.distances[j][i] {
                    return Err(TspError::Asymmetric { i, j });
                }
                if d == 0 || d > top {
                    return Err(TspError::Distance { i, j, d, resolution: r });
                }
            }
        }
        Ok(())
    }

    /// Complete graph with `J_ij = d_ij`, paired with the threshold.
    pub fn to_ising(&self, r: u32) -> Result<(IsingGraph, i64), TspError> {
        crate::ising::graph::check_resolution(r)?;
        self.validate(r)?;
        let n = self.num_cities();
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        let g = IsingGraph::with_edges(
            n,
            r,
            edges.map(|(i, j)| (i, j, self.distances[i][j] as i64)),
        )?;
        Ok((g, self.threshold))
    }
}

/// Decision outcome for a minimized Hamiltonian.
pub fn tsp_decision(h: i64, threshold: i64) -> bool {
    h < threshold
}
