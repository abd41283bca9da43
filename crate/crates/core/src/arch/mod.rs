//! Structural model of the near-memory machine: tuple storage, compute
//! tiles, the four stationarity schedules and their cycle accounting.

pub mod engine;
pub mod prefetch;
pub mod schedule;
pub mod storage;
pub mod tile;
pub mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use engine::{analyze, solve_arch, ArchEngine, ArchError, ArchSolve};
pub use prefetch::{prefetch_step, prefetch_threshold, PrefetchCounter};
pub use schedule::{fragment_schedule, queue_capacity, FragmentSchedule};
pub use storage::{SpinTuple, StorageArray, Writeback};
pub use tile::{ComputeTile, Interleave, TileBank};
pub use trace::{CycleRecord, IterationStats, ScheduleTrace, TraceLevel};

/// Which operand stays resident in the compute array.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Design {
    /// Spin stationary, bit-position-major decoding, sequential tile fill.
    N1a,
    /// Spin stationary, neighbor-major decoding, strided tile fill.
    N1b,
    /// Coefficient stationary.
    N2,
    /// Mixed stationary: coefficients and neighbor spins resident.
    N3,
}

impl Design {
    pub const ALL: [Design; 4] = [Design::N1a, Design::N1b, Design::N2, Design::N3];

    pub fn name(self) -> &'static str {
        match self {
            Design::N1a => "n1a",
            Design::N1b => "n1b",
            Design::N2 => "n2",
            Design::N3 => "n3",
        }
    }

    pub fn interleave(self) -> Interleave {
        match self {
            Design::N1a => Interleave::Sequential,
            _ => Interleave::Strided,
        }
    }

    /// Row bits taken by one neighbor.
    pub fn bits_per_neighbor(self, r: u32) -> usize {
        match self {
            Design::N1a | Design::N1b => 1,
            Design::N2 => r as usize,
            Design::N3 => r as usize + 1,
        }
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Design {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Design::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown design `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchConfig {
    pub tiles: usize,
    pub tile_rows: usize,
    /// Columns per tile row: 100 coefficient slots of 8 bits.
    pub row_bits: usize,
    pub storage_bytes: usize,
    pub read_ports: usize,
    /// Cycles to write one tile row.
    pub write_cycles: u64,
    /// Rows of lead time for a DRAM prefetch.
    pub prefetch_threshold: u64,
    pub trace: TraceLevel,
}

impl Default for ArchConfig {
    fn default() -> Self {
        Self {
            tiles: 16,
            tile_rows: 100,
            row_bits: 800,
            storage_bytes: 160_000,
            read_ports: 2,
            write_cycles: 1,
            prefetch_threshold: prefetch_threshold(20.0, 100.0, 5.0),
            trace: TraceLevel::Summary,
        }
    }
}

impl ArchConfig {
    pub fn tile_bytes(&self) -> usize {
        self.tile_rows * self.row_bits / 8
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = ArchConfig::default();
        assert_eq!(c.tile_bytes(), 10_000);
        assert_eq!(c.tiles * c.tile_bytes(), c.storage_bytes);
        assert_eq!(c.prefetch_threshold, 24);
    }

    #[test]
    fn names() {
        for d in Design::ALL {
            assert_eq!(d.name().parse::<Design>().unwrap(), d);
        }
        assert_eq!(Design::N1a.interleave(), Interleave::Sequential);
        assert_eq!(Design::N2.interleave(), Interleave::Strided);
    }
}
