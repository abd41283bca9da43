use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ising::{resolution_range, GraphError, IsingGraph};

/// How coupling weights of a lattice are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CouplingSource {
    Uniform(i64),
    /// Uniform over the full R-bit range, excluding zero.
    Random { seed: u64 },
}

/// Edges of the 8-connected `m x n` lattice, row-major spin numbering.
pub fn kings_edges(m: usize, n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..m {
        for c in 0..n {
            let i = r * n + c;
            if c + 1 < n {
                out.push((i, i + 1));
            }
            if r + 1 < m {
                if c > 0 {
                    out.push((i, i + n - 1));
                }
                out.push((i, i + n));
                if c + 1 < n {
                    out.push((i, i + n + 1));
                }
            }
        }
    }
    out
}

pub fn kings_edge_count(m: usize, n: usize) -> usize {
    if m == 0 || n == 0 {
        return 0;
    }
    // Horizontal, vertical and two diagonal directions.
    m * (n - 1) + (m - 1) * n + 2 * (m - 1) * (n - 1)
}

pub fn draw_coupling(rng: &mut ChaCha8Rng, r: u32) -> i64 {
    let (lo, hi) = resolution_range(r);
    loop {
        let w = rng.random_range(lo..=hi);
        if w != 0 {
            return w;
        }
    }
}

pub fn kings_graph(
    m: usize,
    n: usize,
    r: u32,
    source: CouplingSource,
) -> Result<IsingGraph, GraphError> {
    let edges = kings_edges(m, n);
    match source {
        CouplingSource::Uniform(w) => {
            IsingGraph::with_edges(m * n, r, edges.into_iter().map(|(i, j)| (i, j, w)))
        }
        CouplingSource::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let weighted: Vec<_> = edges
                .into_iter()
                .map(|(i, j)| (i, j, draw_coupling(&mut rng, r)))
                .collect();
            IsingGraph::with_edges(m * n, r, weighted)
        }
    }
}

/// Near-square lattice dimensions holding at least `spins` sites.
pub fn lattice_dims(spins: usize) -> (usize, usize) {
    let side = (spins as f64).sqrt().ceil().max(1.0) as usize;
    let rows = spins.div_ceil(side).max(1);
    (rows, side)
}

/// Coupled lattice standing in for a molecular-dynamics system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MolecularDynamics {
    pub rows: usize,
    pub cols: usize,
    pub couplings: CouplingSource,
}

impl MolecularDynamics {
    pub fn to_ising(&self, r: u32) -> Result<IsingGraph, GraphError> {
        kings_graph(self.rows, self.cols, r, self.couplings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lattices() {
        assert_eq!(kings_graph(3, 3, 4, CouplingSource::Uniform(1)).unwrap().num_edges(), 20);
        assert_eq!(kings_graph(1, 1, 4, CouplingSource::Uniform(1)).unwrap().num_edges(), 0);
        assert_eq!(kings_graph(2, 2, 4, CouplingSource::Uniform(1)).unwrap().num_edges(), 6);
    }

    #[test]
    fn edge_formula() {
        for m in 2..=6 {
            for n in 2..=6 {
                let e = kings_edges(m, n).len();
                assert_eq!(e, 4 * m * n - 3 * (m + n) + 2);
                assert_eq!(e, kings_edge_count(m, n));
            }
        }
        assert_eq!(kings_edges(1, 5).len(), kings_edge_count(1, 5));
    }

    #[test]
    fn degrees() {
        let g = kings_graph(4, 5, 4, CouplingSource::Uniform(1)).unwrap();
        assert_eq!(g.degree(0), 3);
        assert_eq!(g.degree(2), 5);
        assert_eq!(g.degree(6), 8);
    }

    #[test]
    fn center_field_and_ferromagnetic_energy() {
        let g = kings_graph(3, 3, 4, CouplingSource::Uniform(2)).unwrap();
        assert_eq!(g.local_field(4).unwrap(), -16);
        let g = kings_graph(3, 3, 4, CouplingSource::Uniform(1)).unwrap();
        assert_eq!(g.hamiltonian(), -20);
    }

    #[test]
    fn random_couplings_in_range() {
        let g = kings_graph(5, 5, 2, CouplingSource::Random { seed: 3 }).unwrap();
        assert!(g.edges().iter().all(|e| (-2..=1).contains(&e.weight) && e.weight != 0));
    }

    #[test]
    fn dims_cover_spins() {
        for s in [1, 2, 99, 100, 1000, 10_000] {
            let (r, c) = lattice_dims(s);
            assert!(r * c >= s);
        }
        assert_eq!(lattice_dims(100), (10, 10));
    }
}
