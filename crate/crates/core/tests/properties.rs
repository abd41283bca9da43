use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sachi_core::arch::tile::{get_bit, get_field, set_bit, set_field};
use sachi_core::arch::{analyze, ArchConfig, ArchEngine, Design, StorageArray};
use sachi_core::bits::{bit_serial_dot, decode_ic, encode_ic, reuse_aware_dot, xnor_dot, EncodedSpin};
use sachi_core::cost::{brim_cost, sachi_cost, BaselineParams, BrimMode, ProblemSize, TechParams};
use sachi_core::ising::{
    anneal_accept, local_field_of, resolution_range, solve, spin_rng, spin_update, AnnealConfig, IsingGraph, Spin,
};
use sachi_core::workloads::{kings_graph, random_graph, CouplingSource};

#[test]
fn wide_resolutions_sampled() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for r in 10..=32 {
        let (lo, hi) = resolution_range(r);
        for _ in 0..10_000 {
            let j = rng.random_range(lo..=hi);
            let ic = encode_ic(j, r).unwrap();
            assert_eq!(decode_ic(ic), j);
            for s in [Spin::Up, Spin::Down] {
                let e = EncodedSpin::encode(s);
                assert_eq!(xnor_dot(ic, e), j * s.value(), "R={r} J={j}");
            }
        }
    }
}

fn ic_strategy() -> impl Strategy<Value = (u32, i64)> {
    (2u32..=32).prop_flat_map(|r| {
        let (lo, hi) = resolution_range(r);
        (Just(r), lo..=hi)
    })
}

fn spin() -> impl Strategy<Value = Spin> {
    any::<bool>().prop_map(Spin::from)
}

fn small_graph() -> impl Strategy<Value = IsingGraph> {
    (2usize..40, prop::sample::select(vec![2u32, 3, 4, 8]), 0.05f64..0.6, any::<u64>()).prop_map(
        |(n, r, d, seed)| {
            let mut g = random_graph(n, r, d, seed);
            g.randomize_spins(seed ^ 0xabc);
            g
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn encode_round_trip((r, j) in ic_strategy()) {
        prop_assert_eq!(decode_ic(encode_ic(j, r).unwrap()), j);
    }

    #[test]
    fn bit_serial_matches_word((r, j) in ic_strategy(), s in spin()) {
        let ic = encode_ic(j, r).unwrap();
        let e = EncodedSpin::encode(s);
        prop_assert_eq!(bit_serial_dot(ic, e), xnor_dot(ic, e));
    }

    #[test]
    fn reuse_path_matches((r, j) in ic_strategy(), si in spin(), sj in spin()) {
        let ic = encode_ic(j, r).unwrap();
        let (si, sj) = (EncodedSpin::encode(si), EncodedSpin::encode(sj));
        prop_assert_eq!(reuse_aware_dot(ic, si, sj).0, xnor_dot(ic, sj));
    }

    #[test]
    fn row_fields_match_bitwise(start in 0usize..700, len in 0usize..=32, v in any::<u32>(), fill in any::<u64>()) {
        let mut fast = vec![fill; 13];
        let mut slow = fast.clone();
        set_field(&mut fast, start, len, v);
        for k in 0..len {
            set_bit(&mut slow, start + k, (v >> k & 1) as u8);
        }
        prop_assert_eq!(&fast, &slow);
        let mut expect = 0u32;
        for k in 0..len {
            expect |= (get_bit(&slow, start + k) as u32) << k;
        }
        prop_assert_eq!(get_field(&fast, start, len), expect);
    }

    #[test]
    fn flip_changes_energy_by_local_term(g in small_graph(), pick in any::<prop::sample::Index>()) {
        let i = pick.index(g.num_spins());
        let before = g.hamiltonian();
        let s = g.spins()[i].value();
        let mut acc = g.fields()[i];
        for &(j, w) in g.neighbors(i) {
            acc += w * g.spins()[j].value();
        }
        let mut flipped = g.spins().to_vec();
        flipped[i] = flipped[i].flipped();
        prop_assert_eq!(g.hamiltonian_with(&flipped) - before, 2 * s * acc);
    }

    #[test]
    fn greedy_move_never_raises_energy(g in small_graph(), pick in any::<prop::sample::Index>(), seed in any::<u64>()) {
        let i = pick.index(g.num_spins());
        let field = local_field_of(&g, g.spins(), i);
        prop_assume!(field != 0);
        let mut rng = spin_rng(seed, 1, i);
        let mut next = g.spins().to_vec();
        next[i] = spin_update(field, &mut rng);
        prop_assert!(g.hamiltonian_with(&next) <= g.hamiltonian());
    }

    #[test]
    fn downhill_is_accepted(h_cur in -1000i64..1000, drop in 0i64..1000, iter in 1u64..10_000, seed in any::<u64>()) {
        let cfg = AnnealConfig::new(50.0, seed);
        let mut rng = spin_rng(seed, iter, 0);
        prop_assert!(anneal_accept(iter, h_cur - drop, h_cur, &cfg, &mut rng));
    }

    #[test]
    fn solve_is_deterministic(g in small_graph(), seed in any::<u64>()) {
        let mut cfg = AnnealConfig::for_graph(&g, seed);
        cfg.max_iterations = 100;
        prop_assert_eq!(solve(&g, &cfg).unwrap(), solve(&g, &cfg).unwrap());
    }

    #[test]
    fn every_edge_in_two_tuples(g in small_graph()) {
        let s = StorageArray::build(&g, 160_000, 2);
        prop_assert_eq!(s.num_entries(), 2 * g.num_edges());
        for e in g.edges() {
            let count = s.tuples().iter().filter(|t| {
                (t.owner == e.i && t.neighbor_ids.contains(&e.j)) || (t.owner == e.j && t.neighbor_ids.contains(&e.i))
            }).count();
            prop_assert_eq!(count, 2);
        }
    }

    #[test]
    fn writeback_touches_exactly_the_adjacent_tuples(g in small_graph(), mask in any::<u64>()) {
        let mut s = StorageArray::build(&g, 160_000, 2);
        let next: Vec<Spin> = g.spins().iter().enumerate()
            .map(|(k, &sp)| if mask >> (k % 64) & 1 == 1 { sp.flipped() } else { sp })
            .collect();
        let wb = s.write_back(&next);
        let mut expect: Vec<usize> = (0..g.num_spins())
            .filter(|&i| g.neighbors(i).iter().any(|&(j, _)| next[j] != g.spins()[j]))
            .collect();
        expect.dedup();
        prop_assert_eq!(wb.touched_tuples, expect);
        prop_assert!(s.is_consistent());
    }

    #[test]
    fn arch_fields_match_reference(g in small_graph(), d in prop::sample::select(Design::ALL.to_vec())) {
        let mut e = ArchEngine::new(&g, d, ArchConfig::default()).unwrap();
        let mut cfg = AnnealConfig::for_graph(&g, 5);
        cfg.max_iterations = 20;
        let mut spins = g.spins().to_vec();
        for k in 1..=5 {
            let (next, _, h) = e.run_iteration(&spins, k, &cfg).unwrap();
            prop_assert_eq!(h, g.hamiltonian_with(&next));
            spins = next;
        }
    }

    #[test]
    fn cpi_ordering(g in small_graph(), tiles in 1usize..20, rows in 4usize..120) {
        let cfg = ArchConfig { tiles, tile_rows: rows, ..ArchConfig::default() };
        let cpi: Vec<u64> = Design::ALL.iter()
            .map(|&d| analyze(&g, d, cfg.clone()).unwrap().totals.cycles)
            .collect();
        prop_assert!(cpi[3] <= cpi[2] && cpi[2] <= cpi[1] && cpi[1] <= cpi[0], "{:?}", cpi);
    }

    #[test]
    fn redundant_plus_required_is_all_xnors(g in small_graph(), d in prop::sample::select(Design::ALL.to_vec())) {
        let t = analyze(&g, d, ArchConfig::default()).unwrap().totals;
        prop_assert_eq!(t.required_computes + t.redundant_computes, t.xnor_ops);
        prop_assert_eq!(t.required_computes, 2 * g.num_edges() as u64 * g.resolution() as u64);
    }

    #[test]
    fn energy_breakdown_is_consistent(g in small_graph(), d in prop::sample::select(Design::ALL.to_vec())) {
        let t = analyze(&g, d, ArchConfig::default()).unwrap().totals;
        let rep = sachi_cost(&t, &TechParams::default(), None);
        let b = rep.energy_breakdown;
        prop_assert!([b.rwl, b.rbl, b.movement, b.logic, b.loading].iter().all(|&x| x >= 0.0));
        prop_assert!((rep.total_energy - b.total()).abs() <= 1e-12 * rep.total_energy.max(1e-30));
    }

    #[test]
    fn brim_modes_differ_by_cycle_ratio(spins in 1u64..5000, deg in 1u64..100, iters in 1u64..100) {
        let size = ProblemSize { spins, entries: spins * deg, resolution: 4, max_degree: deg as usize };
        let p = BaselineParams::default();
        let t = TechParams::default();
        let best = brim_cost(&size, iters, &p, BrimMode::Best, &t, None).cycles;
        let worst = brim_cost(&size, iters, &p, BrimMode::Worst, &t, None).cycles;
        prop_assert_eq!(best * 13, worst * 4);
    }
}

#[test]
fn n1_energy_grows_with_resolution() {
    let tech = TechParams::default();
    for seed in 0..5 {
        let mut prev = 0.0;
        for r in [2u32, 4, 8, 16] {
            let g = kings_graph(8, 8, r, CouplingSource::Random { seed }).unwrap();
            let e = sachi_cost(&analyze(&g, Design::N1b, ArchConfig::default()).unwrap().totals, &tech, None).total_energy;
            assert!(e >= prev, "seed {seed} R={r}");
            prev = e;
        }
    }
}

#[test]
fn cpi_invariant_to_resolution_for_n2_n3() {
    for d in [Design::N2, Design::N3] {
        let cpi: Vec<u64> = [2u32, 4, 8]
            .iter()
            .map(|&r| {
                let g = kings_graph(12, 12, r, CouplingSource::Random { seed: 4 }).unwrap();
                analyze(&g, d, ArchConfig::default()).unwrap().totals.cycles
            })
            .collect();
        assert!(cpi.windows(2).all(|w| w[0] == w[1]), "{d}: {cpi:?}");
    }
}
