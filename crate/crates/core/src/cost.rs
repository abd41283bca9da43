//! Energy, latency and power accounting for simulated runs, and analytic
//! models of the two baseline machines.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch::{ArchConfig, ArchEngine, ArchError, Design, IterationStats};
use crate::ising::{AnnealConfig, IsingGraph};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TechParams {
    pub cycle_time_s: f64,
    pub vdd: f64,
    pub c_rwl_f: f64,
    pub c_rbl_f: f64,
    pub sram_compute_latency_s: f64,
    pub movement_j_per_bit: f64,
    pub storage_to_compute_latency_s: f64,
    pub dram_latency_s: f64,
    pub dram_bytes_per_cycle: u64,
    /// Per bit-operation energy of the synthesized adders and update logic.
    pub logic_j_per_op: f64,
    /// Clock and control power of the digital periphery while running.
    pub logic_power_w: f64,
}

impl Default for TechParams {
    fn default() -> Self {
        Self {
            cycle_time_s: 5e-9,
            vdd: 1.0,
            c_rwl_f: 50e-15,
            c_rbl_f: 35e-15,
            sram_compute_latency_s: 2e-9,
            movement_j_per_bit: 1e-12,
            storage_to_compute_latency_s: 100e-9,
            dram_latency_s: 20e-9,
            dram_bytes_per_cycle: 64,
            logic_j_per_op: 10e-15,
            logic_power_w: 1e-3,
        }
    }
}

impl TechParams {
    /// Energy of charging one read wordline.
    pub fn rwl_energy(&self) -> f64 {
        self.c_rwl_f * self.vdd * self.vdd
    }

    /// Energy of one read-bitline discharge.
    pub fn rbl_energy(&self) -> f64 {
        self.c_rbl_f * self.vdd * self.vdd
    }

    /// One in-array XNOR: a wordline pair plus a bitline discharge.
    pub fn xnor_event_energy(&self) -> f64 {
        2.0 * self.rwl_energy() + self.rbl_energy()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    pub brim_cycles_best: u64,
    pub brim_cycles_worst: u64,
    pub brim_osc_power_w: f64,
    pub brim_ref_spins: u64,
    pub brim_ref_neighbors: u64,
    pub dac_power_w: f64,
    pub dac_count: u64,
    /// Mux inputs and width, and flops, toggling once per conversion.
    pub brim_mux_inputs: u64,
    pub brim_mux_bits: u64,
    pub brim_flops: u64,
    pub brim_toggle_j: f64,
    pub isingcim_cycles_per_xnor: u64,
    pub isingcim_power_scale: f64,
    pub isingcim_cpi_scale: u64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            brim_cycles_best: 4,
            brim_cycles_worst: 13,
            brim_osc_power_w: 0.25,
            brim_ref_spins: 2000,
            brim_ref_neighbors: 100,
            dac_power_w: 0.004e-3,
            dac_count: 16,
            brim_mux_inputs: 16,
            brim_mux_bits: 8,
            brim_flops: 128,
            brim_toggle_j: 10e-15,
            isingcim_cycles_per_xnor: 3,
            isingcim_power_scale: 1.2,
            isingcim_cpi_scale: 2,
        }
    }
}

impl BaselineParams {
    pub fn brim_cycles_per_spin(&self, mode: BrimMode) -> u64 {
        match mode {
            BrimMode::Best => self.brim_cycles_best,
            BrimMode::Worst => self.brim_cycles_worst,
        }
    }

    /// Oscillator power, scaled linearly with `spins * neighbors`.
    pub fn brim_osc_power(&self, spins: f64, neighbors: f64) -> f64 {
        let reference = (self.brim_ref_spins * self.brim_ref_neighbors) as f64;
        self.brim_osc_power_w * spins * neighbors / reference
    }

    pub fn brim_conversion_energy(&self) -> f64 {
        let toggles = self.brim_mux_inputs * self.brim_mux_bits + self.brim_flops;
        (self.dac_count * toggles) as f64 * self.brim_toggle_j
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BrimMode {
    Best,
    Worst,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub rwl: f64,
    pub rbl: f64,
    pub movement: f64,
    pub logic: f64,
    pub loading: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.rwl + self.rbl + self.movement + self.logic + self.loading
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub cycles: u64,
    pub execution_time: f64,
    pub energy_breakdown: EnergyBreakdown,
    pub total_energy: f64,
    pub average_power: f64,
}

impl CostReport {
    fn new(cycles: u64, tech: &TechParams, energy: EnergyBreakdown) -> Self {
        let execution_time = cycles as f64 * tech.cycle_time_s;
        let total_energy = energy.total();
        let average_power = if execution_time > 0.0 {
            total_energy / execution_time
        } else {
            0.0
        };
        Self {
            cycles,
            execution_time,
            energy_breakdown: energy,
            total_energy,
            average_power,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Loading {
    pub bits: u64,
    pub cycles: u64,
    pub energy: f64,
    /// The tuples do not fit in the storage array at once.
    pub multi_round: bool,
}

/// One-time DRAM fill of the problem: each directed entry carries its IC and
/// spin bit, each spin its field.
pub fn loading_cost(graph: &IsingGraph, tech: &TechParams, storage_bytes: usize) -> Loading {
    let r = graph.resolution() as u64;
    let entries = 2 * graph.num_edges() as u64;
    let n = graph.num_spins() as u64;
    let bits = if n == 0 { 0 } else { entries * (r + 1) + n * r };
    let bytes = bits.div_ceil(8);
    let id = crate::arch::storage::id_bits(graph.num_spins()) as u64;
    let stored = entries * (r + 1 + id) + n * r;
    Loading {
        bits,
        cycles: bytes.div_ceil(tech.dram_bytes_per_cycle.max(1)),
        energy: bits as f64 * tech.movement_j_per_bit,
        multi_round: stored > storage_bytes as u64 * 8,
    }
}

/// Cost of a simulated run whose per-iteration events were summed into
/// `stats`. The final drain is paid once.
pub fn sachi_cost(stats: &IterationStats, tech: &TechParams, loading: Option<&Loading>) -> CostReport {
    let load_cycles = loading.map_or(0, |l| l.cycles);
    let compute_cycles = stats.cycles + stats.drain_cycles;
    let compute_time = compute_cycles as f64 * tech.cycle_time_s;
    let moved = stats.fetch_bits + stats.row_write_bits + stats.writeback_bits + stats.dram_stream_bits;
    let energy = EnergyBreakdown {
        rwl: 2.0 * stats.rwl_activations as f64 * tech.rwl_energy(),
        rbl: stats.discharges as f64 * tech.rbl_energy(),
        movement: moved as f64 * tech.movement_j_per_bit,
        logic: stats.logic_ops as f64 * tech.logic_j_per_op + tech.logic_power_w * compute_time,
        loading: loading.map_or(0.0, |l| l.energy),
    };
    CostReport::new(compute_cycles + load_cycles, tech, energy)
}

/// Size of a problem as seen by the analytic baselines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSize {
    pub spins: u64,
    /// Directed neighbor entries, `2 * edges`.
    pub entries: u64,
    pub resolution: u32,
    pub max_degree: usize,
}

impl ProblemSize {
    pub fn of(graph: &IsingGraph) -> Self {
        Self {
            spins: graph.num_spins() as u64,
            entries: 2 * graph.num_edges() as u64,
            resolution: graph.resolution(),
            max_degree: graph.max_degree(),
        }
    }

    pub fn average_neighbors(&self) -> f64 {
        if self.spins == 0 {
            0.0
        } else {
            self.entries as f64 / self.spins as f64
        }
    }
}

/// Serial oscillator machine: every neighbor of every spin is visited in turn.
pub fn brim_cost(
    size: &ProblemSize,
    iterations: u64,
    params: &BaselineParams,
    mode: BrimMode,
    tech: &TechParams,
    loading: Option<&Loading>,
) -> CostReport {
    let visits = iterations * size.entries.max(size.spins);
    let cycles = visits * params.brim_cycles_per_spin(mode);
    let time = cycles as f64 * tech.cycle_time_s;
    let power = params.brim_osc_power(size.spins as f64, size.average_neighbors())
        + params.dac_count as f64 * params.dac_power_w;
    let energy = EnergyBreakdown {
        logic: power * time + visits as f64 * params.brim_conversion_energy(),
        loading: loading.map_or(0.0, |l| l.energy),
        ..Default::default()
    };
    CostReport::new(cycles + loading.map_or(0, |l| l.cycles), tech, energy)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CostError {
    #[error("Ising-CIM only handles King's-graph problems with R <= 2 (got max degree {max_degree}, R={resolution})")]
    Inapplicable { max_degree: usize, resolution: u32 },
}

/// Whether the eDRAM compute-in-memory baseline can map the problem.
pub fn isingcim_applicable(size: &ProblemSize) -> bool {
    size.max_degree <= 8 && size.resolution <= 2
}

/// Bit-serial eDRAM baseline. Its array draws `isingcim_power_scale` times
/// the array power of `sachi`, a compute-only report, for the whole run.
pub fn isingcim_cost(
    size: &ProblemSize,
    iterations: u64,
    sachi: &CostReport,
    params: &BaselineParams,
    tech: &TechParams,
    loading: Option<&Loading>,
) -> Result<CostReport, CostError> {
    if !isingcim_applicable(size) {
        return Err(CostError::Inapplicable {
            max_degree: size.max_degree,
            resolution: size.resolution,
        });
    }
    let r = size.resolution as u64;
    let xnor = size.entries * r * params.isingcim_cycles_per_xnor;
    let update = size.spins * params.isingcim_cpi_scale;
    let cycles = iterations * (xnor + update);
    let time = cycles as f64 * tech.cycle_time_s;
    let sachi_time = sachi.execution_time;
    let scale = |e: f64| if sachi_time > 0.0 { e / sachi_time * time } else { 0.0 };
    let b = sachi.energy_breakdown;
    let energy = EnergyBreakdown {
        rwl: params.isingcim_power_scale * scale(b.rwl),
        rbl: params.isingcim_power_scale * scale(b.rbl),
        movement: scale(b.movement),
        logic: scale(b.logic),
        loading: loading.map_or(0.0, |l| l.energy),
    };
    Ok(CostReport::new(cycles + loading.map_or(0, |l| l.cycles), tech, energy))
}

/// Run totals for `iterations`. The first iteration, which maps every row,
/// is counted once; the next `sample` iterations are averaged and scaled to
/// the rest of the run.
pub fn estimate_run(
    graph: &IsingGraph,
    design: Design,
    arch: ArchConfig,
    anneal: &AnnealConfig,
    sample: u64,
    iterations: u64,
) -> Result<IterationStats, ArchError> {
    let mut engine = ArchEngine::new(graph, design, arch)?;
    if iterations == 0 {
        return Ok(IterationStats::default());
    }
    let (mut spins, first, _) = engine.run_iteration(graph.spins(), 1, anneal)?;
    let rest = iterations - 1;
    let sample = sample.clamp(1, rest.max(1));
    let mut out = first.totals;
    if rest > 0 {
        let mut sum = IterationStats::default();
        let mut drain = 0;
        for k in 2..=sample + 1 {
            let (next, trace, _) = engine.run_iteration(&spins, k, anneal)?;
            drain = trace.totals.drain_cycles;
            sum += trace.totals;
            spins = next;
        }
        out += scale_stats(&sum, rest, sample);
        out.drain_cycles = drain;
    }
    Ok(out)
}

/// Scales additive counters by `num / den`, rounding to nearest.
pub fn scale_stats(s: &IterationStats, num: u64, den: u64) -> IterationStats {
    let f = |v: u64| ((v as u128 * num as u128 + den as u128 / 2) / den.max(1) as u128) as u64;
    IterationStats {
        cycles: f(s.cycles),
        stall_cycles: f(s.stall_cycles),
        xnor_ops: f(s.xnor_ops),
        required_computes: f(s.required_computes),
        redundant_computes: f(s.redundant_computes),
        equality_ops: f(s.equality_ops),
        rwl_activations: f(s.rwl_activations),
        col_enables: f(s.col_enables),
        discharges: f(s.discharges),
        operand_fetches: f(s.operand_fetches),
        fetch_bits: f(s.fetch_bits),
        row_write_bits: f(s.row_write_bits),
        writeback_bits: f(s.writeback_bits),
        logic_ops: f(s.logic_ops),
        prefetches: f(s.prefetches),
        dram_stream_bits: f(s.dram_stream_bits),
        flips: f(s.flips),
        ..*s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub design: String,
    pub benchmark: String,
    pub spins: u64,
    pub resolution: u32,
    pub loading: bool,
    /// None when the baseline cannot map the problem.
    pub report: Option<CostReport>,
    pub reuse: Option<f64>,
    /// This row's time and energy over those of SACHI(n3).
    pub time_ratio: Option<f64>,
    pub energy_ratio: Option<f64>,
}

pub struct CompareInput<'a> {
    pub graph: &'a IsingGraph,
    pub benchmark: &'a str,
    pub iterations: u64,
    pub sample_iterations: u64,
    pub arch: ArchConfig,
    pub anneal: AnnealConfig,
    pub tech: TechParams,
    pub baselines: BaselineParams,
}

/// Every SACHI design against both BRIM modes and Ising-CIM, with and
/// without loading.
pub fn compare(input: &CompareInput<'_>) -> Result<Vec<CompareRow>, ArchError> {
    let g = input.graph;
    let size = ProblemSize::of(g);
    let load = loading_cost(g, &input.tech, input.arch.storage_bytes);
    let mut designs = Vec::new();
    for d in Design::ALL {
        let stats = estimate_run(g, d, input.arch.clone(), &input.anneal, input.sample_iterations, input.iterations)?;
        designs.push((d, stats));
    }
    let mut rows = Vec::new();
    for with_loading in [false, true] {
        let l = with_loading.then_some(&load);
        let mut block: Vec<(String, Option<CostReport>, Option<f64>)> = Vec::new();
        let mut n3 = None;
        for (d, stats) in &designs {
            let rep = sachi_cost(stats, &input.tech, l);
            if *d == Design::N3 {
                n3 = Some(rep);
            }
            block.push((format!("sachi-{d}"), Some(rep), Some(stats.reuse())));
        }
        let n3 = n3.expect("n3 is always simulated");
        let n3_compute = sachi_cost(&designs[3].1, &input.tech, None);
        for mode in [BrimMode::Best, BrimMode::Worst] {
            let name = match mode {
                BrimMode::Best => "brim-best",
                BrimMode::Worst => "brim-worst",
            };
            let rep = brim_cost(&size, input.iterations, &input.baselines, mode, &input.tech, l);
            block.push((name.into(), Some(rep), None));
        }
        let cim = isingcim_cost(&size, input.iterations, &n3_compute, &input.baselines, &input.tech, l).ok();
        block.push(("ising-cim".into(), cim, None));
        for (design, report, reuse) in block {
            let ratio = |a: f64, b: f64| if b > 0.0 { Some(a / b) } else { None };
            rows.push(CompareRow {
                design,
                benchmark: input.benchmark.to_string(),
                spins: size.spins,
                resolution: size.resolution,
                loading: with_loading,
                time_ratio: report.and_then(|r| ratio(r.execution_time, n3.execution_time)),
                energy_ratio: report.and_then(|r| ratio(r.total_energy, n3.total_energy)),
                report,
                reuse,
            });
        }
    }
    Ok(rows)
}

pub const COMPARE_HEADER: &str =
    "design,benchmark,spins,R,loading,cycles,time_s,energy_J,reuse,time_ratio_vs_n3,energy_ratio_vs_n3";

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = format!("{COMPARE_HEADER}\n");
    let opt = |v: Option<f64>| v.map_or("N/A".to_string(), |x| format!("{x:.6e}"));
    for r in rows {
        let (cycles, time, energy) = match &r.report {
            Some(rep) => (rep.cycles.to_string(), format!("{:.6e}", rep.execution_time), format!("{:.6e}", rep.total_energy)),
            None => ("N/A".into(), "N/A".into(), "N/A".into()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.design,
            r.benchmark,
            r.spins,
            r.resolution,
            r.loading,
            cycles,
            time,
            energy,
            r.reuse.map_or("N/A".to_string(), |x| format!("{x:.3}")),
            opt(r.time_ratio),
            opt(r.energy_ratio),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workloads::{kings_graph, CouplingSource};

    #[test]
    fn event_energies() {
        let t = TechParams::default();
        assert!((t.rwl_energy() - 50e-15).abs() < 1e-24);
        assert!((t.rbl_energy() - 35e-15).abs() < 1e-24);
    }

    #[test]
    fn breakdown_sums() {
        let stats = IterationStats {
            cycles: 10,
            rwl_activations: 3,
            discharges: 7,
            fetch_bits: 5,
            logic_ops: 4,
            ..Default::default()
        };
        let t = TechParams::default();
        let r = sachi_cost(&stats, &t, None);
        assert!((r.total_energy - r.energy_breakdown.total()).abs() < 1e-30);
        assert!((r.execution_time - 10.0 * 5e-9).abs() < 1e-18);
        assert!((r.energy_breakdown.rwl - 300e-15).abs() < 1e-24);
    }

    #[test]
    fn zero_compute_is_loading_only() {
        let g = kings_graph(10, 10, 8, CouplingSource::Uniform(1)).unwrap();
        let t = TechParams::default();
        let l = loading_cost(&g, &t, 160_000);
        let r = sachi_cost(&IterationStats::default(), &t, Some(&l));
        assert_eq!(r.total_energy, l.energy);
        assert_eq!(r.cycles, l.cycles);
    }

    #[test]
    fn kings_loading() {
        let g = kings_graph(10, 10, 8, CouplingSource::Uniform(1)).unwrap();
        let l = loading_cost(&g, &TechParams::default(), 160_000);
        assert_eq!(l.bits, 684 * 9 + 800);
        assert_eq!(l.cycles, 14);
        assert!(!l.multi_round);
        let empty = IsingGraph::with_edges(0, 4, []).unwrap();
        assert_eq!(loading_cost(&empty, &TechParams::default(), 160_000).cycles, 0);
    }

    #[test]
    fn brim_reference_points() {
        let p = BaselineParams::default();
        assert!((p.brim_osc_power(2000.0, 100.0) - 0.25).abs() < 1e-12);
        let one = ProblemSize { spins: 1, entries: 1, resolution: 4, max_degree: 1 };
        let t = TechParams::default();
        assert_eq!(brim_cost(&one, 1, &p, BrimMode::Best, &t, None).cycles, 4);
        assert_eq!(brim_cost(&one, 1, &p, BrimMode::Worst, &t, None).cycles, 13);
    }

    #[test]
    fn isingcim_gate_and_event_ratio() {
        let g = kings_graph(5, 5, 4, CouplingSource::Uniform(1)).unwrap();
        let size = ProblemSize::of(&g);
        let t = TechParams::default();
        let p = BaselineParams::default();
        let sachi = sachi_cost(&IterationStats { cycles: 1, ..Default::default() }, &t, None);
        assert!(matches!(
            isingcim_cost(&size, 1, &sachi, &p, &t, None),
            Err(CostError::Inapplicable { resolution: 4, .. })
        ));
        let two = ProblemSize { resolution: 2, ..size };
        assert!(isingcim_cost(&two, 1, &sachi, &p, &t, None).is_ok());
        let cim_event = p.isingcim_power_scale * t.xnor_event_energy();
        assert!((cim_event / t.xnor_event_energy() - 1.2).abs() < 1e-12);
    }

    #[test]
    fn isingcim_power_is_scaled_sachi_array_power() {
        let g = kings_graph(6, 6, 2, CouplingSource::Random { seed: 3 }).unwrap();
        let t = TechParams::default();
        let p = BaselineParams::default();
        let anneal = AnnealConfig::for_graph(&g, 1);
        let stats = estimate_run(&g, Design::N3, ArchConfig::default(), &anneal, 2, 10).unwrap();
        let s = sachi_cost(&stats, &t, None);
        let c = isingcim_cost(&ProblemSize::of(&g), 10, &s, &p, &t, None).unwrap();
        let array = |r: &CostReport| (r.energy_breakdown.rwl + r.energy_breakdown.rbl) / r.execution_time;
        assert!((array(&c) / array(&s) - 1.2).abs() < 1e-9);
    }

    #[test]
    fn compare_rows() {
        let g = kings_graph(6, 6, 2, CouplingSource::Random { seed: 3 }).unwrap();
        let input = CompareInput {
            graph: &g,
            benchmark: "molecular",
            iterations: 100,
            sample_iterations: 2,
            arch: ArchConfig::default(),
            anneal: AnnealConfig::for_graph(&g, 1),
            tech: TechParams::default(),
            baselines: BaselineParams::default(),
        };
        let rows = compare(&input).unwrap();
        assert_eq!(rows.len(), 14);
        assert!(rows.iter().all(|r| r.report.is_some()));
        let csv = compare_csv(&rows);
        assert_eq!(csv.lines().count(), 15);
        assert!(csv.starts_with(COMPARE_HEADER));
    }
}
