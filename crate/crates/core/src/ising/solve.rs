use serde::{Deserialize, Serialize};

use super::anneal::{sweep_update, AnnealConfig, ConfigError};
use super::graph::{hamiltonian_of, local_field_of, Couplings, IsingGraph};
use super::Spin;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub final_spins: Vec<Spin>,
    pub final_hamiltonian: i64,
    pub initial_hamiltonian: i64,
    pub hamiltonian_trace: Vec<i64>,
    pub iterations_run: usize,
    /// Uphill flips accepted by the Metropolis test, per iteration.
    pub anneal_flips: Vec<usize>,
    /// All flips, per iteration.
    pub spin_flips: Vec<usize>,
    pub converged: bool,
    /// Lowest Hamiltonian over the start state and every iteration.
    pub best_hamiltonian: i64,
    /// Hamiltonian after the last iteration.
    pub last_hamiltonian: i64,
    /// Whether `final_spins` is an earlier, better state than the last one.
    pub restored_best: bool,
}

/// Anything that can evaluate local fields and the Hamiltonian for a spin
/// state. The reference solver and every architectural model implement this,
/// and share the update phase and stopping rule through [`solve_with`].
pub trait SweepEngine {
    type Couplings: Couplings;

    fn couplings(&self) -> &Self::Couplings;

    /// Local fields of all spins against `spins`, for iteration `iter_num`.
    fn local_fields(&mut self, spins: &[Spin], iter_num: u64) -> Vec<i64>;

    /// Hamiltonian of `spins`. Called once per iteration after the update.
    fn hamiltonian(&mut self, spins: &[Spin]) -> i64;

    /// Called with the new state at the end of every iteration.
    fn commit(&mut self, _spins: &[Spin], _iter_num: u64) {}
}

/// Drives `engine` from `initial` until the Hamiltonian holds still for
/// `convergence_window` iterations or the iteration budget runs out.
pub fn solve_with<E: SweepEngine>(
    engine: &mut E,
    initial: &[Spin],
    cfg: &AnnealConfig,
) -> Result<SolveResult, ConfigError> {
    cfg.validate()?;
    let mut spins = initial.to_vec();
    let initial_hamiltonian = engine.hamiltonian(&spins);
    let mut best_hamiltonian = initial_hamiltonian;
    let mut best_spins = spins.clone();
    let mut trace = Vec::new();
    let mut anneal_flips = Vec::new();
    let mut spin_flips = Vec::new();
    let mut prev = initial_hamiltonian;
    let mut streak = 0;
    let mut converged = false;

    for k in 1..=cfg.max_iterations {
        let iter_num = k as u64;
        let fields = engine.local_fields(&spins, iter_num);
        let out = sweep_update(engine.couplings(), &spins, &fields, iter_num, cfg);
        spins = out.spins;
        engine.commit(&spins, iter_num);
        let h = engine.hamiltonian(&spins);
        trace.push(h);
        anneal_flips.push(out.uphill);
        spin_flips.push(out.flips);
        if h < best_hamiltonian {
            best_hamiltonian = h;
            best_spins.clone_from(&spins);
        }
        // A plateau held up by thermal flips is not convergence.
        if h == prev && out.uphill == 0 {
            streak += 1;
        } else {
            streak = 0;
        }
        prev = h;
        if streak >= cfg.convergence_window {
            converged = true;
            break;
        }
    }

    let last_hamiltonian = trace.last().copied().unwrap_or(initial_hamiltonian);
    let restored_best = cfg.keep_best && best_hamiltonian < last_hamiltonian;
    let (final_spins, final_hamiltonian) = if restored_best {
        (best_spins, best_hamiltonian)
    } else {
        (spins, last_hamiltonian)
    };
    Ok(SolveResult {
        final_spins,
        final_hamiltonian,
        initial_hamiltonian,
        iterations_run: trace.len(),
        hamiltonian_trace: trace,
        anneal_flips,
        spin_flips,
        converged,
        best_hamiltonian,
        last_hamiltonian,
        restored_best,
    })
}

/// The architecture-independent engine.
pub struct ReferenceEngine<'a> {
    graph: &'a IsingGraph,
}

impl<'a> ReferenceEngine<'a> {
    pub fn new(graph: &'a IsingGraph) -> Self {
        Self { graph }
    }
}

impl SweepEngine for ReferenceEngine<'_> {
    type Couplings = IsingGraph;

    fn couplings(&self) -> &IsingGraph {
        self.graph
    }

    fn local_fields(&mut self, spins: &[Spin], _iter_num: u64) -> Vec<i64> {
        (0..spins.len())
            .map(|i| local_field_of(self.graph, spins, i))
            .collect()
    }

    fn hamiltonian(&mut self, spins: &[Spin]) -> i64 {
        hamiltonian_of(self.graph, spins)
    }
}

/// Anneals `graph` from its current spins.
pub fn solve(graph: &IsingGraph, cfg: &AnnealConfig) -> Result<SolveResult, ConfigError> {
    solve_with(&mut ReferenceEngine::new(graph), graph.spins(), cfg)
}
