use std::fmt::Write as _;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use super::Design;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceLevel {
    /// Totals only.
    #[default]
    Summary,
    /// Totals plus one record per active (cycle, tile).
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: u64,
    pub tile: usize,
    pub phase_mask: u8,
    pub rwl_count: u32,
    pub col_enables: u32,
    pub queue_occ: u32,
}

/// Event totals for one Hamiltonian iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationStats {
    /// Last phase-1 cycle over all tiles, summed over rounds, plus stalls.
    pub cycles: u64,
    /// Phases 3 to 5 still in flight after the last phase-1 cycle.
    pub drain_cycles: u64,
    pub stall_cycles: u64,
    pub rounds: u64,
    pub tiles_used: u64,
    pub xnor_ops: u64,
    pub required_computes: u64,
    pub redundant_computes: u64,
    pub equality_ops: u64,
    /// Read-wordline pair activations (each drives RWL and RWL').
    pub rwl_activations: u64,
    pub col_enables: u64,
    pub discharges: u64,
    pub operand_fetches: u64,
    pub fetch_bits: u64,
    pub row_write_bits: u64,
    pub writeback_bits: u64,
    pub logic_ops: u64,
    pub queue_max: u64,
    pub first_p3: u64,
    pub prefetches: u64,
    pub dram_stream_bits: u64,
    pub flips: u64,
}

impl IterationStats {
    /// Required computes per row-operand fetch.
    pub fn reuse(&self) -> f64 {
        if self.operand_fetches == 0 {
            0.0
        } else {
            self.required_computes as f64 / self.operand_fetches as f64
        }
    }
}

impl AddAssign for IterationStats {
    fn add_assign(&mut self, o: Self) {
        self.cycles += o.cycles;
        self.drain_cycles = self.drain_cycles.max(o.drain_cycles);
        self.stall_cycles += o.stall_cycles;
        self.rounds = self.rounds.max(o.rounds);
        self.tiles_used = self.tiles_used.max(o.tiles_used);
        self.xnor_ops += o.xnor_ops;
        self.required_computes += o.required_computes;
        self.redundant_computes += o.redundant_computes;
        self.equality_ops += o.equality_ops;
        self.rwl_activations += o.rwl_activations;
        self.col_enables += o.col_enables;
        self.discharges += o.discharges;
        self.operand_fetches += o.operand_fetches;
        self.fetch_bits += o.fetch_bits;
        self.row_write_bits += o.row_write_bits;
        self.writeback_bits += o.writeback_bits;
        self.logic_ops += o.logic_ops;
        self.queue_max = self.queue_max.max(o.queue_max);
        self.first_p3 = match (self.first_p3, o.first_p3) {
            (0, b) => b,
            (a, 0) => a,
            (a, b) => a.min(b),
        };
        self.prefetches += o.prefetches;
        self.dram_stream_bits += o.dram_stream_bits;
        self.flips += o.flips;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleTrace {
    pub design: Design,
    pub level: TraceLevel,
    pub records: Vec<CycleRecord>,
    pub totals: IterationStats,
}

#[derive(Serialize)]
struct Summary {
    design: &'static str,
    cpi: u64,
    reuse: f64,
    xnor_ops: u64,
    redundant_ops: u64,
    rounds: u64,
    prefetches: u64,
}

impl ScheduleTrace {
    pub fn cycles_per_iteration(&self) -> u64 {
        self.totals.cycles
    }

    pub fn reuse_factor(&self) -> f64 {
        self.totals.reuse()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("cycle,tile,phase_mask,rwl_count,col_enables,queue_occ\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.cycle, r.tile, r.phase_mask, r.rwl_count, r.col_enables, r.queue_occ
            );
        }
        out
    }

    pub fn summary_json(&self) -> String {
        let s = Summary {
            design: self.design.name(),
            cpi: self.totals.cycles,
            reuse: self.totals.reuse(),
            xnor_ops: self.totals.xnor_ops,
            redundant_ops: self.totals.redundant_computes,
            rounds: self.totals.rounds,
            prefetches: self.totals.prefetches,
        };
        serde_json::to_string_pretty(&s).expect("plain struct serializes")
    }
}
