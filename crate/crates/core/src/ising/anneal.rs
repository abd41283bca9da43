use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::graph::{Couplings, IsingGraph};
use super::Spin;

/// Multiplier on the mean coupling magnitude for the default starting
/// temperature.
pub const DEFAULT_TEMP_SCALE: f64 = 128.0;
pub const DEFAULT_WINDOW: usize = 10;
pub const DEFAULT_MAX_ITERATIONS: usize = 20_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("init_temp must be positive and finite, got {0}")]
    InitTemp(f64),
    #[error("convergence_window must be at least 1")]
    Window,
}

/// How the per-spin decisions of one iteration are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Every spin decides from the iteration-start snapshot alone.
    Synchronous,
    /// Spins decide in a rotating order; each decision sees the flips already
    /// committed earlier in the same iteration through a correction applied
    /// to its snapshot field.
    #[default]
    Ordered,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub init_temp: f64,
    pub max_iterations: usize,
    pub convergence_window: usize,
    pub rng_seed: u64,
    #[serde(default)]
    pub mode: SweepMode,
    /// Return the lowest-energy state seen instead of the last one.
    #[serde(default = "yes")]
    pub keep_best: bool,
}

fn yes() -> bool {
    true
}

impl AnnealConfig {
    pub fn new(init_temp: f64, seed: u64) -> Self {
        Self {
            init_temp,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            convergence_window: DEFAULT_WINDOW,
            rng_seed: seed,
            mode: SweepMode::Ordered,
            keep_best: true,
        }
    }

    /// Defaults with the starting temperature scaled to `graph`.
    pub fn for_graph(graph: &IsingGraph, seed: u64) -> Self {
        Self::new(default_init_temp(graph), seed)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.init_temp.is_finite() && self.init_temp > 0.0) {
            return Err(ConfigError::InitTemp(self.init_temp));
        }
        if self.convergence_window == 0 {
            return Err(ConfigError::Window);
        }
        Ok(())
    }
}

/// `DEFAULT_TEMP_SCALE` times the mean `|J_ij|`, or times the mean `|h_i|`
/// for graphs without couplings, and never below 1.
pub fn default_init_temp(graph: &IsingGraph) -> f64 {
    let mean = |it: &mut dyn Iterator<Item = i64>| {
        let (sum, count) = it.fold((0f64, 0usize), |(s, c), v| (s + v.abs() as f64, c + 1));
        if count == 0 { 0.0 } else { sum / count as f64 }
    };
    let scale = if graph.num_edges() > 0 {
        mean(&mut graph.edges().iter().map(|e| e.weight))
    } else {
        mean(&mut graph.fields().iter().copied())
    };
    (DEFAULT_TEMP_SCALE * scale).max(1.0)
}

/// `T = init_temp / iter_num`.
pub fn temperature(init_temp: f64, iter_num: u64) -> f64 {
    init_temp / iter_num.max(1) as f64
}

/// Random stream owned by one spin in one iteration.
pub fn spin_rng(seed: u64, iter_num: u64, spin: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((iter_num << 32) ^ spin as u64);
    rng
}

/// Greedy update from the sign of the local field. Ties draw from `rng`.
pub fn spin_update<R: Rng + ?Sized>(h_sigma: i64, rng: &mut R) -> Spin {
    match h_sigma.signum() {
        1 => Spin::Down,
        -1 => Spin::Up,
        _ => Spin::from(rng.random_bool(0.5)),
    }
}

/// Metropolis acceptance of a move from energy `h_current` to `h_updated`.
pub fn anneal_accept<R: Rng + ?Sized>(
    iter_num: u64,
    h_updated: i64,
    h_current: i64,
    cfg: &AnnealConfig,
    rng: &mut R,
) -> bool {
    let likelihood = acceptance_likelihood(iter_num, h_updated - h_current, cfg.init_temp);
    let l: f64 = rng.random();
    l < likelihood
}

pub fn acceptance_likelihood(iter_num: u64, delta: i64, init_temp: f64) -> f64 {
    let t = temperature(init_temp, iter_num);
    (-(delta as f64) / t).exp().min(1.0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepOutcome {
    pub spins: Vec<Spin>,
    pub flips: usize,
    /// Flips that raised the energy seen by the spin.
    pub uphill: usize,
}

/// Position of spin `i` in the decision order of iteration `iter_num`.
pub fn priority(i: usize, n: usize, iter_num: u64) -> usize {
    let start = (iter_num % n as u64) as usize;
    (i + n - start) % n
}

/// One iteration of the spin-update phase.
///
/// `h_sigma[i]` is the local field of spin `i` against `spins`, however it
/// was computed. Each spin first takes the greedy step from the sign of its
/// field; when that keeps the current value, the opposite value is offered
/// to the Metropolis test instead.
pub fn sweep_update<C: Couplings>(
    couplings: &C,
    spins: &[Spin],
    h_sigma: &[i64],
    iter_num: u64,
    cfg: &AnnealConfig,
) -> SweepOutcome {
    let n = spins.len();
    debug_assert_eq!(couplings.num_spins(), n);
    debug_assert_eq!(h_sigma.len(), n);
    let mut next = spins.to_vec();
    let mut flips = 0;
    let mut uphill = 0;
    if n == 0 {
        return SweepOutcome { spins: next, flips, uphill };
    }

    // Change to h_sigma from spins already flipped this iteration.
    let mut shift = vec![0i64; n];
    let start = (iter_num % n as u64) as usize;
    for step in 0..n {
        let i = match cfg.mode {
            SweepMode::Ordered => (start + step) % n,
            SweepMode::Synchronous => step,
        };
        let s = spins[i];
        let view = h_sigma[i] + shift[i];
        let mut rng = spin_rng(cfg.rng_seed, iter_num, i);
        let greedy = spin_update(view, &mut rng);
        // Energy of spin i in its current and flipped state: s * H_view.
        let e_cur = s.value() * view;
        let e_flip = -e_cur;
        let flip = if greedy != s {
            true
        } else if e_flip > e_cur {
            let up = anneal_accept(iter_num, e_flip, e_cur, cfg, &mut rng);
            uphill += usize::from(up);
            up
        } else {
            false
        };
        if flip {
            next[i] = -s;
            flips += 1;
            if cfg.mode == SweepMode::Ordered {
                let sv = s.value();
                couplings.for_each_neighbor(i, |j, w| shift[j] += 2 * w * sv);
            }
        }
    }
    SweepOutcome { spins: next, flips, uphill }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::graph::{local_field_of, IsingGraph};

    fn cfg(temp: f64) -> AnnealConfig {
        AnnealConfig {
            init_temp: temp,
            max_iterations: 100,
            convergence_window: 10,
            rng_seed: 7,
            mode: SweepMode::Ordered,
            keep_best: true,
        }
    }

    #[test]
    fn spin_update_sign() {
        let mut rng = spin_rng(1, 1, 0);
        assert_eq!(spin_update(5, &mut rng), Spin::Down);
        assert_eq!(spin_update(-5, &mut rng), Spin::Up);
        let a = spin_update(0, &mut spin_rng(3, 1, 0));
        let b = spin_update(0, &mut spin_rng(3, 1, 0));
        assert_eq!(a, b);
    }

    #[test]
    fn tie_is_not_constant() {
        let ups = (0..200)
            .filter(|&s| spin_update(0, &mut spin_rng(s, 1, 0)).is_up())
            .count();
        assert!((60..140).contains(&ups), "ups = {ups}");
    }

    #[test]
    fn downhill_always_accepted() {
        let c = cfg(10.0);
        for seed in 0..100 {
            let mut rng = spin_rng(seed, 1, 0);
            assert!(anneal_accept(1, -4, 3, &c, &mut rng));
            assert!(anneal_accept(1, 2, 2, &c, &mut rng));
        }
    }

    #[test]
    fn likelihood_at_delta_equal_temperature() {
        let p = acceptance_likelihood(2, 5, 10.0);
        assert!((p - (-1f64).exp()).abs() < 1e-12);
        let c = cfg(10.0);
        for seed in 0..50 {
            let draw: f64 = spin_rng(seed, 2, 0).random();
            let accepted = anneal_accept(2, 5, 0, &c, &mut spin_rng(seed, 2, 0));
            assert_eq!(accepted, draw < p);
        }
    }

    #[test]
    fn frozen_limit_rejects_uphill() {
        assert_eq!(acceptance_likelihood(u64::MAX, 1, 1.0), 0.0);
    }

    #[test]
    fn ordered_sweep_aligns_pair() {
        let g = IsingGraph::with_edges(2, 4, [(0, 1, 1)]).unwrap();
        let spins = vec![Spin::Up, Spin::Down];
        let h: Vec<i64> = (0..2).map(|i| local_field_of(&g, &spins, i)).collect();
        let out = sweep_update(&g, &spins, &h, 1_000_000, &cfg(1.0));
        assert_eq!(out.flips, 1);
        assert_eq!(out.spins[0], out.spins[1]);
    }

    #[test]
    fn synchronous_sweep_swaps_pair() {
        let g = IsingGraph::with_edges(2, 4, [(0, 1, 1)]).unwrap();
        let spins = vec![Spin::Up, Spin::Down];
        let h: Vec<i64> = (0..2).map(|i| local_field_of(&g, &spins, i)).collect();
        let mut c = cfg(1.0);
        c.mode = SweepMode::Synchronous;
        let out = sweep_update(&g, &spins, &h, 1_000_000, &c);
        assert_eq!(out.spins, vec![Spin::Down, Spin::Up]);
    }

    #[test]
    fn default_temperature_tracks_coupling_scale() {
        let g = IsingGraph::with_edges(3, 8, [(0, 1, -10), (1, 2, 30)]).unwrap();
        assert_eq!(default_init_temp(&g), DEFAULT_TEMP_SCALE * 20.0);
        let g = IsingGraph::with_edges(3, 8, []).unwrap();
        assert_eq!(default_init_temp(&g), 1.0);
    }

    #[test]
    fn priority_rotates() {
        assert_eq!(priority(3, 5, 3), 0);
        assert_eq!(priority(2, 5, 3), 4);
        assert_eq!(priority(0, 5, 10), 0);
    }
}
