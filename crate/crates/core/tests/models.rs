use sachi_core::arch::{analyze, solve_arch, ArchConfig, Design};
use sachi_core::cost::{compare, BaselineParams, CompareInput, CompareRow, TechParams};
use sachi_core::ising::{solve, AnnealConfig};
use sachi_core::workloads::{random_graph, Benchmark};

fn energy(rows: &[CompareRow], design: &str) -> f64 {
    rows.iter()
        .find(|r| r.design == design && !r.loading)
        .and_then(|r| r.report)
        .map(|r| r.total_energy)
        .unwrap_or(f64::NAN)
}

fn rows_for(bench: Benchmark, spins: usize, r: u32) -> Vec<CompareRow> {
    let g = bench.generate(spins, r, 2).unwrap();
    let input = CompareInput {
        graph: &g,
        benchmark: bench.name(),
        iterations: 200,
        sample_iterations: 2,
        arch: ArchConfig::default(),
        anneal: AnnealConfig::for_graph(&g, 2),
        tech: TechParams::default(),
        baselines: BaselineParams::default(),
    };
    compare(&input).unwrap()
}

#[test]
fn design_energy_ordering() {
    for bench in Benchmark::ALL {
        let rows = rows_for(bench, 256, 4);
        let e = |d| energy(&rows, d);
        assert!(e("sachi-n3") < e("sachi-n2"), "{bench}");
        assert!(e("sachi-n2") < e("sachi-n1b"), "{bench}");
        assert!(e("sachi-n1b") <= e("sachi-n1a"), "{bench}");
        assert!(e("sachi-n1a") < e("brim-best"), "{bench}");
        assert!(e("brim-best") < e("brim-worst"), "{bench}");
    }
    let rows = rows_for(Benchmark::Molecular, 256, 2);
    assert!(energy(&rows, "sachi-n1a") < energy(&rows, "ising-cim"));
}

#[test]
fn overflowing_problem_streams_from_dram() {
    let mut g = random_graph(300, 8, 1.0, 3);
    g.randomize_spins(1);
    let t = analyze(&g, Design::N3, ArchConfig::default()).unwrap().totals;
    assert!(t.dram_stream_bits > 0);
    assert!(t.prefetches >= 1);
    let mut cfg = AnnealConfig::for_graph(&g, 1);
    cfg.max_iterations = 15;
    let reference = solve(&g, &cfg).unwrap();
    let arch = solve_arch(&g, Design::N1b, ArchConfig::default(), &cfg).unwrap();
    assert_eq!(arch.result.hamiltonian_trace, reference.hamiltonian_trace);
}

#[test]
fn tsp_cpi_grows_superlinearly_on_n1a() {
    let cpi = |n| {
        let g = Benchmark::Tsp.generate(n, 4, 1).unwrap();
        analyze(&g, Design::N1a, ArchConfig::default()).unwrap().totals.cycles as f64
    };
    let per_spin: Vec<f64> = [50usize, 100, 200, 400].iter().map(|&n| cpi(n) / n as f64).collect();
    assert!(per_spin.windows(2).all(|w| w[1] > w[0]), "{per_spin:?}");
}

#[test]
fn small_bank_forces_rounds_and_stalls_are_bounded() {
    let g = Benchmark::Molecular.generate(400, 4, 5).unwrap();
    let one = analyze(&g, Design::N3, ArchConfig::default()).unwrap().totals;
    let cfg = ArchConfig { tiles: 2, tile_rows: 20, ..ArchConfig::default() };
    let many = analyze(&g, Design::N3, cfg).unwrap().totals;
    assert_eq!(one.rounds, 1);
    assert_eq!(many.rounds, 10);
    assert!(many.cycles > one.cycles);
    assert!(many.row_write_bits > 0);
}
