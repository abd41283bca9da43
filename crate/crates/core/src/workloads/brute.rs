use rayon::prelude::*;
use thiserror::Error;

use crate::ising::{IsingGraph, Spin};

pub const MAX_BRUTE_SPINS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("brute force limited to {MAX_BRUTE_SPINS} spins, got {0}")]
pub struct TooManySpins(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ground {
    pub hamiltonian: i64,
    pub spins: Vec<Spin>,
}

/// Spin `i` is up when bit `n - 1 - i` of `key` is set, so comparing keys
/// orders configurations lexicographically with -1 before +1.
fn spins_of(key: u32, n: usize) -> Vec<Spin> {
    (0..n).map(|i| Spin::from(key >> (n - 1 - i) & 1 == 1)).collect()
}

/// Exhaustive scan of the assignments whose top `n - low` bits equal `prefix`,
/// visiting the low bits in Gray-code order.
fn scan_block(graph: &IsingGraph, prefix: u32, low: usize) -> (i64, u32) {
    let n = graph.num_spins();
    let mut key = prefix << low;
    let mut spins = spins_of(key, n);
    let mut force: Vec<i64> = (0..n)
        .map(|i| {
            graph.neighbors(i).iter().map(|&(j, w)| w * spins[j].value()).sum::<i64>()
                + graph.fields()[i]
        })
        .collect();
    let mut h = graph.hamiltonian_with(&spins);
    let mut best = (h, key);

    for step in 1u32..(1u32 << low) {
        let bit = step.trailing_zeros() as usize;
        let i = n - 1 - bit;
        let s = spins[i].value();
        h += 2 * s * force[i];
        for &(j, w) in graph.neighbors(i) {
            force[j] -= 2 * w * s;
        }
        spins[i] = -spins[i];
        key ^= 1 << bit;
        if (h, key) < best {
            best = (h, key);
        }
    }
    best
}

/// Minimum Hamiltonian over all `2^n` assignments. Among equal minima the
/// lexicographically smallest assignment is returned.
pub fn brute_force_ground(graph: &IsingGraph) -> Result<Ground, TooManySpins> {
    let n = graph.num_spins();
    if n > MAX_BRUTE_SPINS {
        return Err(TooManySpins(n));
    }
    let high = n.saturating_sub(12).min(8);
    let low = n - high;
    let (hamiltonian, key) = (0u32..(1u32 << high))
        .into_par_iter()
        .map(|prefix| scan_block(graph, prefix, low))
        .min()
        .expect("at least one block");
    Ok(Ground {
        hamiltonian,
        spins: spins_of(key, n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workloads::random_graph;

    fn naive(graph: &IsingGraph) -> Ground {
        let n = graph.num_spins();
        let mut best: Option<Ground> = None;
        for key in 0u32..(1 << n) {
            let spins = spins_of(key, n);
            let h = graph.hamiltonian_with(&spins);
            if best.as_ref().is_none_or(|b| h < b.hamiltonian) {
                best = Some(Ground { hamiltonian: h, spins });
            }
        }
        best.unwrap()
    }

    #[test]
    fn pair() {
        let g = IsingGraph::with_edges(2, 4, [(0, 1, 1)]).unwrap();
        let ground = brute_force_ground(&g).unwrap();
        assert_eq!(ground.hamiltonian, -1);
        assert_eq!(ground.spins, vec![Spin::Down, Spin::Down]);
    }

    #[test]
    fn matches_naive_scan() {
        for seed in 0..20 {
            let g = random_graph(9 + (seed as usize % 6), 4, 0.5, seed);
            assert_eq!(brute_force_ground(&g).unwrap(), naive(&g), "seed {seed}");
        }
    }

    #[test]
    fn size_guard() {
        let g = IsingGraph::with_edges(25, 4, []).unwrap();
        assert_eq!(brute_force_ground(&g), Err(TooManySpins(25)));
        let g = IsingGraph::with_edges(0, 4, []).unwrap();
        assert_eq!(brute_force_ground(&g).unwrap().hamiltonian, 0);
    }
}
