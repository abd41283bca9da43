use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Spin;

pub const MIN_RESOLUTION: u32 = 2;
pub const MAX_RESOLUTION: u32 = 32;

/// Upper bound on `num_spins + num_edges`.
///
/// With R <= 32 every term of the Hamiltonian is bounded by 2^31, so 2^30
/// terms keep the accumulator inside 62 bits.
pub const MAX_TERMS: usize = 1 << 30;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("resolution {0} outside {MIN_RESOLUTION}..={MAX_RESOLUTION}")]
    Resolution(u32),
    #[error("spin index {index} out of range for {num_spins} spins")]
    IndexOutOfRange { index: usize, num_spins: usize },
    #[error("self-loop on spin {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("value {value} does not fit in {resolution}-bit two's complement")]
    ValueRange { value: i64, resolution: u32 },
    #[error("graph too large: {0} terms")]
    TooLarge(usize),
    #[error("expected {expected} spins, got {got}")]
    SpinCount { expected: usize, got: usize },
}

/// Inclusive range of an `r`-bit two's complement integer.
pub fn resolution_range(r: u32) -> (i64, i64) {
    let half = 1i64 << (r - 1);
    (-half, half - 1)
}

pub fn check_resolution(r: u32) -> Result<(), GraphError> {
    if (MIN_RESOLUTION..=MAX_RESOLUTION).contains(&r) {
        Ok(())
    } else {
        Err(GraphError::Resolution(r))
    }
}

fn check_value(value: i64, resolution: u32) -> Result<(), GraphError> {
    let (lo, hi) = resolution_range(resolution);
    if value < lo || value > hi {
        Err(GraphError::ValueRange { value, resolution })
    } else {
        Ok(())
    }
}

/// An undirected coupling, stored with `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: i64,
}

/// Read access to a coupling structure. Implemented by the graph itself and
/// by the tuple storage of the architectural model, so the spin-update logic
/// can run against either.
pub trait Couplings {
    fn num_spins(&self) -> usize;
    fn field(&self, i: usize) -> i64;
    fn for_each_neighbor<F: FnMut(usize, i64)>(&self, i: usize, f: F);
}

/// An Ising problem: spins, signed R-bit couplings and external fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsingGraph {
    resolution: u32,
    spins: Vec<Spin>,
    fields: Vec<i64>,
    edges: Vec<Edge>,
    neighbors: Vec<Vec<(usize, i64)>>,
}

impl IsingGraph {
    /// Builds a graph from an edge list. Edges may be given in either
    /// orientation; they are normalized to `i < j` and sorted.
    pub fn from_parts(
        num_spins: usize,
        resolution: u32,
        fields: Vec<i64>,
        edges: impl IntoIterator<Item = (usize, usize, i64)>,
    ) -> Result<Self, GraphError> {
        check_resolution(resolution)?;
        if fields.len() != num_spins {
            return Err(GraphError::SpinCount {
                expected: num_spins,
                got: fields.len(),
            });
        }
        for &h in &fields {
            check_value(h, resolution)?;
        }

        let mut list = Vec::new();
        for (a, b, w) in edges {
            for idx in [a, b] {
                if idx >= num_spins {
                    return Err(GraphError::IndexOutOfRange {
                        index: idx,
                        num_spins,
                    });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            check_value(w, resolution)?;
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            list.push(Edge { i, j, weight: w });
        }
        if num_spins.saturating_add(list.len()) > MAX_TERMS {
            return Err(GraphError::TooLarge(num_spins + list.len()));
        }
        list.sort_unstable_by_key(|e| (e.i, e.j));
        if let Some(w) = list.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(GraphError::DuplicateEdge(w[0].i, w[0].j));
        }

        let mut neighbors = vec![Vec::new(); num_spins];
        for e in &list {
            neighbors[e.i].push((e.j, e.weight));
            neighbors[e.j].push((e.i, e.weight));
        }
        for row in &mut neighbors {
            row.sort_unstable_by_key(|&(j, _)| j);
        }

        Ok(Self {
            resolution,
            spins: vec![Spin::Up; num_spins],
            fields,
            edges: list,
            neighbors,
        })
    }

    /// A graph with no fields.
    pub fn with_edges(
        num_spins: usize,
        resolution: u32,
        edges: impl IntoIterator<Item = (usize, usize, i64)>,
    ) -> Result<Self, GraphError> {
        Self::from_parts(num_spins, resolution, vec![0; num_spins], edges)
    }

    pub fn num_spins(&self) -> usize {
        self.spins.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn fields(&self) -> &[i64] {
        &self.fields
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `i` sorted by index, with the coupling weight.
    pub fn neighbors(&self, i: usize) -> &[(usize, i64)] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<i64> {
        let row = self.neighbors.get(i)?;
        row.binary_search_by_key(&j, |&(k, _)| k)
            .ok()
            .map(|pos| row[pos].1)
    }

    pub fn set_spin(&mut self, i: usize, s: Spin) -> Result<(), GraphError> {
        let n = self.num_spins();
        let slot = self
            .spins
            .get_mut(i)
            .ok_or(GraphError::IndexOutOfRange { index: i, num_spins: n })?;
        *slot = s;
        Ok(())
    }

    pub fn set_spins(&mut self, spins: Vec<Spin>) -> Result<(), GraphError> {
        if spins.len() != self.num_spins() {
            return Err(GraphError::SpinCount {
                expected: self.num_spins(),
                got: spins.len(),
            });
        }
        self.spins = spins;
        Ok(())
    }

    /// Replaces the spin state with a uniformly random one drawn from `seed`.
    pub fn randomize_spins(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX);
        for s in &mut self.spins {
            *s = Spin::from(rng.random_bool(0.5));
        }
    }

    /// `H = -sum J_ij s_i s_j - sum h_i s_i` for the current spins.
    pub fn hamiltonian(&self) -> i64 {
        hamiltonian_of(self, &self.spins)
    }

    /// Hamiltonian of an arbitrary assignment.
    pub fn hamiltonian_with(&self, spins: &[Spin]) -> i64 {
        hamiltonian_of(self, spins)
    }

    /// `H_sigma(i) = sum_j -J_ij s_j - h_i`.
    pub fn local_field(&self, i: usize) -> Result<i64, GraphError> {
        if i >= self.num_spins() {
            return Err(GraphError::IndexOutOfRange {
                index: i,
                num_spins: self.num_spins(),
            });
        }
        Ok(local_field_of(self, &self.spins, i))
    }

    pub fn average_degree(&self) -> f64 {
        if self.num_spins() == 0 {
            0.0
        } else {
            2.0 * self.num_edges() as f64 / self.num_spins() as f64
        }
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            num_spins: self.num_spins(),
            num_edges: self.num_edges(),
            resolution: self.resolution,
        }
    }
}

impl Couplings for IsingGraph {
    fn num_spins(&self) -> usize {
        self.spins.len()
    }

    fn field(&self, i: usize) -> i64 {
        self.fields[i]
    }

    fn for_each_neighbor<F: FnMut(usize, i64)>(&self, i: usize, mut f: F) {
        for &(j, w) in &self.neighbors[i] {
            f(j, w);
        }
    }
}

/// Hamiltonian of an arbitrary spin assignment on `graph`.
pub fn hamiltonian_of(graph: &IsingGraph, spins: &[Spin]) -> i64 {
    let coupling: i64 = graph
        .edges
        .iter()
        .map(|e| e.weight * spins[e.i].value() * spins[e.j].value())
        .sum();
    let field: i64 = graph
        .fields
        .iter()
        .zip(spins)
        .map(|(h, s)| h * s.value())
        .sum();
    -coupling - field
}

/// Local field of spin `i` under an arbitrary assignment.
pub fn local_field_of<C: Couplings>(couplings: &C, spins: &[Spin], i: usize) -> i64 {
    let mut acc = 0i64;
    couplings.for_each_neighbor(i, |j, w| acc += w * spins[j].value());
    -acc - couplings.field(i)
}

/// Size summary used by the analytic cost models.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub num_spins: usize,
    pub num_edges: usize,
    pub resolution: u32,
}

impl GraphStats {
    pub fn average_degree(&self) -> f64 {
        if self.num_spins == 0 {
            0.0
        } else {
            2.0 * self.num_edges as f64 / self.num_spins as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(j: i64) -> IsingGraph {
        IsingGraph::with_edges(2, 4, [(0, 1, j)]).unwrap()
    }

    #[test]
    fn aligned_and_antialigned_pair() {
        let mut g = pair(1);
        assert_eq!(g.hamiltonian(), -1);
        g.set_spin(1, Spin::Down).unwrap();
        assert_eq!(g.hamiltonian(), 1);
    }

    #[test]
    fn local_field_examples() {
        let g = pair(3);
        assert_eq!(g.local_field(0).unwrap(), -3);

        let mut g = IsingGraph::from_parts(2, 4, vec![1, 0], [(0, 1, 3)]).unwrap();
        g.set_spin(1, Spin::Down).unwrap();
        assert_eq!(g.local_field(0).unwrap(), 2);
        assert!(matches!(
            g.local_field(2),
            Err(GraphError::IndexOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn rejects_invalid_edges() {
        assert_eq!(
            IsingGraph::with_edges(2, 4, [(0, 0, 1)]),
            Err(GraphError::SelfLoop(0))
        );
        assert_eq!(
            IsingGraph::with_edges(3, 4, [(0, 1, 1), (1, 0, 2)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert_eq!(
            IsingGraph::with_edges(2, 4, [(0, 1, 8)]),
            Err(GraphError::ValueRange { value: 8, resolution: 4 })
        );
        assert!(IsingGraph::with_edges(2, 4, [(0, 1, -8)]).is_ok());
        assert!(matches!(
            IsingGraph::with_edges(2, 4, [(0, 2, 1)]),
            Err(GraphError::IndexOutOfRange { index: 2, .. })
        ));
        assert_eq!(
            IsingGraph::with_edges(2, 1, []),
            Err(GraphError::Resolution(1))
        );
        assert_eq!(
            IsingGraph::with_edges(2, 33, []),
            Err(GraphError::Resolution(33))
        );
    }

    #[test]
    fn edges_are_normalized() {
        let g = IsingGraph::with_edges(3, 4, [(2, 0, 1), (1, 0, -2)]).unwrap();
        assert_eq!(
            g.edges(),
            &[
                Edge { i: 0, j: 1, weight: -2 },
                Edge { i: 0, j: 2, weight: 1 }
            ]
        );
        assert_eq!(g.weight(2, 0), Some(1));
        assert_eq!(g.weight(1, 2), None);
    }

    #[test]
    fn extreme_values_do_not_overflow() {
        let lo = resolution_range(32).0;
        let g = IsingGraph::from_parts(3, 32, vec![lo; 3], [(0, 1, lo), (1, 2, lo), (0, 2, lo)])
            .unwrap();
        assert_eq!(g.hamiltonian(), -(3 * lo) - 3 * lo);
    }
}
