use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ising::{resolution_range, GraphError, IsingGraph, Spin};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssetError {
    #[error("no assets")]
    Empty,
    #[error("asset value {value} must be positive and fit in {resolution} bits")]
    Value { value: u64, resolution: u32 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Coupling structure used for a partition instance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssetForm {
    /// `J_ij = -v_i v_j` over all pairs, rescaled into R bits when needed.
    #[default]
    Complete,
    /// Star around asset 0 with `J_0i = -v_i`.
    Sparse,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetAllocation {
    pub values: Vec<u64>,
}

impl AssetAllocation {
    pub fn new(values: Vec<u64>) -> Self {
        Self { values }
    }

    /// `|sum v_i s_i|` for one assignment.
    pub fn imbalance(&self, spins: &[Spin]) -> u64 {
        let s: i64 = self
            .values
            .iter()
            .zip(spins)
            .map(|(&v, s)| v as i64 * s.value())
            .sum();
        s.unsigned_abs()
    }

    /// Largest pairwise product, the scale of the complete form.
    fn max_product(&self) -> u64 {
        let mut top = self.values.clone();
        top.sort_unstable_by(|a, b| b.cmp(a));
        match top.as_slice() {
            [a, b, ..] => a * b,
            _ => 0,
        }
    }

    /// Whether the complete form holds `v_i v_j` exactly at resolution `r`.
    pub fn is_exact(&self, r: u32) -> bool {
        self.max_product() <= 1u64 << (r - 1)
    }

    pub fn to_ising(&self, r: u32, form: AssetForm) -> Result<IsingGraph, AssetError> {
        crate::ising::graph::check_resolution(r)?;
        if self.values.is_empty() {
            return Err(AssetError::Empty);
        }
        let max = resolution_range(r).1 as u64;
        if let Some(&value) = self.values.iter().find(|&&v| v == 0 || v > max) {
            return Err(AssetError::Value { value, resolution: r });
        }
        let n = self.values.len();
        let v = &self.values;
        let graph = match form {
            AssetForm::Complete => {
                let limit = 1u64 << (r - 1);
                let scale = self.max_product().max(1);
                let exact = self.is_exact(r);
                let mut edges = Vec::with_capacity(n * (n - 1) / 2);
                for i in 0..n {
                    for j in i + 1..n {
                        let p = v[i] * v[j];
                        let w = if exact {
                            p
                        } else {
                            ((p as u128 * limit as u128 + scale as u128 / 2) / scale as u128)
                                .max(1) as u64
                        };
                        edges.push((i, j, -(w as i64)));
                    }
                }
                IsingGraph::with_edges(n, r, edges)?
            }
            AssetForm::Sparse => {
                IsingGraph::with_edges(n, r, (1..n).map(|i| (0, i, -(v[i] as i64))))?
            }
        };
        Ok(graph)
    }

    /// Imbalance recovered from the Hamiltonian of an exact complete form.
    pub fn imbalance_from_hamiltonian(&self, h: i64) -> u64 {
        let sq: i64 = self.values.iter().map(|&v| (v * v) as i64).sum();
        let s2 = 2 * h + sq;
        (s2.max(0) as f64).sqrt().round() as u64
    }

    /// Random values in `1..=max_value` that admit a perfect split: the
    /// second half copies the first, and for odd counts one copy is broken
    /// into two parts.
    pub fn with_perfect_split(count: usize, max_value: u64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let first: Vec<u64> = (0..count / 2).map(|_| rng.random_range(1..=max_value)).collect();
        let mut values = first.clone();
        match first.split_first() {
            Some((&head, rest)) if count % 2 == 1 && head >= 2 => {
                values.extend([head - 1, 1]);
                values.extend_from_slice(rest);
            }
            Some((&head, rest)) if count % 2 == 1 => {
                values[0] = 2;
                values.extend([1, 1]);
                values.extend_from_slice(rest);
                debug_assert_eq!(head, 1);
            }
            _ if count % 2 == 1 => values.push(rng.random_range(1..=max_value)),
            _ => values.extend(first),
        }
        Self { values }
    }

    pub fn random(count: usize, max_value: u64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            values: (0..count).map(|_| rng.random_range(1..=max_value)).collect(),
        }
    }
}
