use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::prefetch::PrefetchCounter;
use super::schedule::{fragment_schedule, CycleActivity, FragmentSchedule};
use super::storage::StorageArray;
use super::tile::{get_bit, get_field, set_bit, set_field, words_for, Placement, RowTag, TileBank, TileError};
use super::trace::{CycleRecord, IterationStats, ScheduleTrace, TraceLevel};
use super::{ArchConfig, Design};
use crate::bits::{finish_product, reuse_aware_from_xnor, EncodedSpin};
use crate::ising::{
    solve_with, sweep_update, AnnealConfig, ConfigError, IsingGraph, SolveResult, Spin, SweepEngine,
};

#[derive(Debug, Error)]
pub enum ArchError {
    #[error("a {design} row of {row_bits} bits cannot hold one neighbor at R={resolution}")]
    RowTooNarrow {
        design: Design,
        row_bits: usize,
        resolution: u32,
    },
    #[error("bank needs at least one tile and one row")]
    EmptyBank,
    #[error(transparent)]
    Tile(#[from] TileError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// One tile row's share of a tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Slot {
    tuple: usize,
    segment: usize,
    first: usize,
    count: usize,
    width: usize,
}

/// A spin's consecutive rows within one tile.
#[derive(Clone, Copy, Debug)]
struct Fragment {
    tuple: usize,
    units: usize,
}

pub struct ArchEngine {
    design: Design,
    cfg: ArchConfig,
    storage: StorageArray,
    bank: TileBank,
    slots: Vec<Slot>,
    rounds: usize,
    per_round: usize,
    resolution: u32,
    schedules: HashMap<usize, FragmentSchedule>,
    last: Option<ScheduleTrace>,
    history: Vec<IterationStats>,
}

impl ArchEngine {
    pub fn new(graph: &IsingGraph, design: Design, cfg: ArchConfig) -> Result<Self, ArchError> {
        if cfg.tiles == 0 || cfg.tile_rows == 0 {
            return Err(ArchError::EmptyBank);
        }
        let r = graph.resolution();
        let bpn = design.bits_per_neighbor(r);
        let per_row = cfg.row_bits / bpn;
        if per_row == 0 {
            return Err(ArchError::RowTooNarrow {
                design,
                row_bits: cfg.row_bits,
                resolution: r,
            });
        }
        let storage = StorageArray::build(graph, cfg.storage_bytes, cfg.read_ports);
        let mut slots = Vec::new();
        for t in storage.tuples() {
            let n = t.degree();
            let segs = n.div_ceil(per_row).max(1);
            for g in 0..segs {
                let first = g * per_row;
                let count = per_row.min(n - first.min(n));
                slots.push(Slot {
                    tuple: t.owner,
                    segment: g,
                    first,
                    count,
                    width: count * bpn,
                });
            }
        }
        // Rounds are filled evenly so no round is left short.
        let rounds = slots.len().div_ceil(cfg.tiles * cfg.tile_rows).max(1);
        let per_round = slots.len().div_ceil(rounds).max(1);
        let bank = TileBank::new(cfg.tiles, cfg.tile_rows, cfg.row_bits, design.interleave());
        Ok(Self {
            design,
            cfg,
            storage,
            bank,
            slots,
            rounds,
            per_round,
            resolution: r,
            schedules: HashMap::new(),
            last: None,
            history: Vec::new(),
        })
    }

    pub fn design(&self) -> Design {
        self.design
    }

    pub fn storage(&self) -> &StorageArray {
        &self.storage
    }

    pub fn bank(&self) -> &TileBank {
        &self.bank
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn rows_used(&self) -> usize {
        self.slots.len()
    }

    pub fn last_trace(&self) -> Option<&ScheduleTrace> {
        self.last.as_ref()
    }

    pub fn history(&self) -> &[IterationStats] {
        &self.history
    }

    /// Required computes per row-operand fetch for spin `i`.
    pub fn spin_reuse(&self, i: usize) -> f64 {
        let n = self.storage.tuple(i).degree() as f64;
        let r = self.resolution as f64;
        match self.design {
            Design::N1a | Design::N1b => 1.0,
            Design::N2 => r,
            Design::N3 => (n * r).max(1.0),
        }
    }

    fn schedule(&mut self, units: usize) -> &FragmentSchedule {
        let (d, r) = (self.design, self.resolution);
        self.schedules
            .entry(units)
            .or_insert_with(|| fragment_schedule(d, units, r))
    }

    fn row_content(&self, slot: &Slot) -> Vec<u64> {
        let t = self.storage.tuple(slot.tuple);
        let r = self.resolution as usize;
        let mut words = vec![0u64; words_for(self.cfg.row_bits)];
        for m in 0..slot.count {
            let e = slot.first + m;
            match self.design {
                Design::N1a | Design::N1b => set_bit(&mut words, m, t.neighbor_spins[e].bit),
                Design::N2 => set_field(&mut words, m * r, r, t.ics[e].bits),
                Design::N3 => {
                    set_field(&mut words, m * r, r, t.ics[e].bits);
                    set_bit(&mut words, slot.count * r + m, t.neighbor_spins[e].bit);
                }
            }
        }
        words
    }

    fn round_slots(&self, round: usize) -> std::ops::Range<usize> {
        let lo = round * self.per_round;
        lo.min(self.slots.len())..((round + 1) * self.per_round).min(self.slots.len())
    }

    fn place(&self, k: usize) -> Placement {
        self.bank.place(k % self.per_round)
    }

    /// Writes the rows of `round` from storage. Returns the bits moved: a
    /// row already holding the same tuple slice only moves its changed
    /// cells.
    fn map_round(&mut self, round: usize) -> Result<u64, ArchError> {
        let range = self.round_slots(round);
        let mut moved = 0u64;
        let mut used = vec![vec![false; self.cfg.tile_rows]; self.cfg.tiles];
        for k in range {
            let slot = self.slots[k];
            let p = self.place(k);
            let tag = RowTag {
                tuple: slot.tuple,
                segment: slot.segment,
                first_neighbor: slot.first,
                neighbors: slot.count,
            };
            let content = self.row_content(&slot);
            let tile = &mut self.bank.tiles[p.tile];
            let same = tile.mapping(p.row) == Some(tag);
            let changed = tile.write_row(p.row, &content, slot.width, tag)?;
            moved += if same { changed } else { slot.width as u64 };
            used[p.tile][p.row] = true;
        }
        for (t, rows) in used.iter().enumerate() {
            let stale: Vec<usize> = (0..rows.len())
                .filter(|&r| !rows[r] && self.bank.tiles[t].mapping(r).is_some())
                .collect();
            for r in stale {
                self.bank.tiles[t].clear_row(r);
            }
        }
        Ok(moved)
    }

    /// Bit-level evaluation of one slot. Adds the partial sum of `J_ij s_j`
    /// to `acc` and the events to `stats`.
    fn compute_slot(&self, k: usize, acc: &mut i64, stats: &mut IterationStats) -> Result<(), ArchError> {
        let slot = self.slots[k];
        let p = self.place(k);
        let tile = &self.bank.tiles[p.tile];
        let t = self.storage.tuple(slot.tuple);
        let r = self.resolution;
        let ru = r as usize;
        let n = slot.count as u64;
        if slot.count == 0 {
            return Ok(());
        }
        match self.design {
            Design::N1a | Design::N1b => {
                for m in 0..slot.count {
                    let e = slot.first + m;
                    let ic = t.ics[e];
                    let mut word = 0u32;
                    for bit in 0..r {
                        let a = tile.activate(p.row, ic.bit(bit))?;
                        word |= (get_bit(a.bits, m) as u32) << bit;
                        stats.discharges += a.discharges as u64;
                    }
                    *acc += finish_product(word, r, t.neighbor_spins[e].is_negative());
                }
                let acts = n * r as u64;
                stats.rwl_activations += acts;
                stats.col_enables += acts;
                stats.xnor_ops += acts * n;
                stats.required_computes += acts;
                stats.redundant_computes += acts * (n - 1);
                stats.operand_fetches += acts;
                stats.fetch_bits += acts;
            }
            Design::N2 => {
                for m in 0..slot.count {
                    let e = slot.first + m;
                    let sj = t.neighbor_spins[e];
                    let a = tile.activate(p.row, sj.bit)?;
                    let word = get_field(a.bits, m * ru, ru);
                    stats.discharges += a.discharges as u64;
                    *acc += finish_product(word, r, sj.is_negative());
                }
                stats.rwl_activations += n;
                stats.col_enables += n * r as u64;
                stats.xnor_ops += n * n * r as u64;
                stats.required_computes += n * r as u64;
                stats.redundant_computes += n * (n - 1) * r as u64;
                stats.operand_fetches += n;
                stats.fetch_bits += n;
            }
            Design::N3 => {
                let si = EncodedSpin::encode(self.storage.spins()[slot.tuple]);
                let a = tile.activate(p.row, si.bit)?;
                for m in 0..slot.count {
                    let word = get_field(a.bits, m * ru, ru);
                    let eq = get_bit(a.bits, slot.count * ru + m);
                    *acc += reuse_aware_from_xnor(word, eq, si, r).0;
                }
                stats.discharges += a.discharges as u64;
                stats.rwl_activations += 1;
                stats.xnor_ops += n * r as u64;
                stats.equality_ops += n;
                stats.required_computes += n * r as u64;
                if slot.segment == 0 {
                    stats.operand_fetches += 1;
                    stats.fetch_bits += 1;
                }
            }
        }
        stats.logic_ops += n * 2 * (r as u64 + 1);
        Ok(())
    }

    /// Fragments per tile for `round`, in row order.
    fn fragments(&self, round: usize) -> Vec<Vec<Fragment>> {
        let mut per_tile: Vec<Vec<(usize, Slot)>> = vec![Vec::new(); self.cfg.tiles];
        for k in self.round_slots(round) {
            let p = self.place(k);
            per_tile[p.tile].push((p.row, self.slots[k]));
        }
        per_tile
            .into_iter()
            .map(|mut rows| {
                rows.sort_by_key(|&(row, _)| row);
                let mut out: Vec<Fragment> = Vec::new();
                for (_, s) in rows {
                    let units = match self.design {
                        Design::N3 => usize::from(s.count > 0),
                        _ => s.count,
                    };
                    match out.last_mut() {
                        Some(f) if f.tuple == s.tuple => f.units += units,
                        _ => out.push(Fragment { tuple: s.tuple, units }),
                    }
                }
                out
            })
            .collect()
    }

    fn stream_stats(&self, stats: &mut IterationStats) {
        if !self.storage.overflow() {
            return;
        }
        let cap = self.storage.capacity_bytes() as u64 * 8;
        stats.dram_stream_bits = self.storage.tuple_bits() - cap;
        let chunks = self.storage.chunks();
        let n = self.storage.num_spins() as u64;
        let per_chunk = n.div_ceil(chunks);
        let mut counter = PrefetchCounter::new(per_chunk.min(n), self.cfg.prefetch_threshold);
        let mut left = n;
        for c in 0..chunks {
            let rows = per_chunk.min(left);
            if c > 0 {
                counter.rearm(rows);
            }
            counter.step(rows);
            left -= rows;
        }
        stats.prefetches = counter.requests_issued;
    }

    /// Local fields of every spin, computed in the tiles.
    fn evaluate(&mut self, spins: &[Spin]) -> Result<Vec<i64>, ArchError> {
        let mut stats = IterationStats::default();
        if self.storage.spins() != spins {
            let wb = self.storage.write_back(spins);
            stats.writeback_bits += (wb.entries_written + wb.flipped.len()) as u64;
        }
        let mut acc: Vec<i64> = self.storage.tuples().iter().map(|t| t.field).collect();
        let level = self.cfg.trace;
        let mut records: BTreeMap<(u64, usize), CycleActivity> = BTreeMap::new();
        let mut offset = 0u64;
        let mut round_loads: Vec<Vec<u64>> = Vec::new();
        let mut round_rows: Vec<Vec<u64>> = Vec::new();
        stats.rounds = self.rounds as u64;

        for round in 0..self.rounds {
            stats.row_write_bits += self.map_round(round)?;
            stats.tiles_used = stats.tiles_used.max(self.bank.tiles_used() as u64);
            for k in self.round_slots(round) {
                let tuple = self.slots[k].tuple;
                self.compute_slot(k, &mut acc[tuple], &mut stats)?;
            }

            let frags = self.fragments(round);
            let mut tile_cycles = vec![0u64; self.cfg.tiles];
            let mut tile_end = vec![0u64; self.cfg.tiles];
            for (t, list) in frags.iter().enumerate() {
                for f in list {
                    let sched = self.schedule(f.units).clone();
                    let base = tile_cycles[t];
                    if let Some(p3) = sched.first_p3 {
                        stats.first_p3 = if stats.first_p3 == 0 { p3 } else { stats.first_p3.min(p3) };
                    }
                    stats.queue_max = stats.queue_max.max(sched.queue_max as u64);
                    if level == TraceLevel::Full {
                        for (&c, a) in &sched.cycles {
                            let e = records.entry((offset + base + c, t)).or_default();
                            e.phase_mask |= a.phase_mask;
                            e.rwl_count += a.rwl_count;
                            e.col_enables += a.col_enables;
                            e.queue_occ += a.queue_occ;
                        }
                    }
                    tile_end[t] = tile_end[t].max(base + sched.last_p5);
                    tile_cycles[t] = base + sched.p1_cycles;
                }
            }
            let cpi = tile_cycles.iter().copied().max().unwrap_or(0);
            let end = tile_end.iter().copied().max().unwrap_or(0);
            stats.drain_cycles = end.saturating_sub(cpi);
            offset += cpi;
            stats.cycles += cpi;
            round_loads.push(tile_cycles);
            round_rows.push(frags.iter().map(|l| l.len() as u64).collect());
        }

        // Rows of the next round are written through the second port while
        // the current round computes; only a shortfall stalls.
        if self.rounds > 1 {
            for round in 0..self.rounds {
                let next = (round + 1) % self.rounds;
                let stall = round_loads[round]
                    .iter()
                    .zip(&round_rows[next])
                    .map(|(&busy, &rows)| (rows * self.cfg.write_cycles).saturating_sub(busy))
                    .max()
                    .unwrap_or(0);
                stats.stall_cycles += stall;
            }
            stats.cycles += stats.stall_cycles;
        }
        self.stream_stats(&mut stats);

        let records = records
            .into_iter()
            .map(|((cycle, tile), a)| CycleRecord {
                cycle,
                tile,
                phase_mask: a.phase_mask,
                rwl_count: a.rwl_count,
                col_enables: a.col_enables,
                queue_occ: a.queue_occ,
            })
            .collect();
        self.history.push(stats);
        self.last = Some(ScheduleTrace {
            design: self.design,
            level,
            records,
            totals: stats,
        });
        Ok(acc.into_iter().map(|f| -f).collect())
    }

    /// One full iteration: tile compute, spin update, storage writeback.
    pub fn run_iteration(
        &mut self,
        spins: &[Spin],
        iter_num: u64,
        anneal: &AnnealConfig,
    ) -> Result<(Vec<Spin>, ScheduleTrace, i64), ArchError> {
        let fields = self.evaluate(spins)?;
        let out = sweep_update(&self.storage, spins, &fields, iter_num, anneal);
        self.commit(&out.spins, iter_num);
        let h = self.storage.hamiltonian(&out.spins);
        let trace = self.last.clone().expect("evaluate records a trace");
        Ok((out.spins, trace, h))
    }
}

impl SweepEngine for ArchEngine {
    type Couplings = StorageArray;

    fn couplings(&self) -> &StorageArray {
        &self.storage
    }

    fn local_fields(&mut self, spins: &[Spin], _iter_num: u64) -> Vec<i64> {
        self.evaluate(spins).expect("layout validated at construction")
    }

    fn hamiltonian(&mut self, spins: &[Spin]) -> i64 {
        self.storage.hamiltonian(spins)
    }

    fn commit(&mut self, spins: &[Spin], _iter_num: u64) {
        let wb = self.storage.write_back(spins);
        let bits = (wb.entries_written + wb.flipped.len()) as u64;
        if let Some(s) = self.history.last_mut() {
            s.writeback_bits += bits;
            s.flips += wb.flipped.len() as u64;
        }
        if let Some(t) = self.last.as_mut() {
            t.totals.writeback_bits += bits;
            t.totals.flips += wb.flipped.len() as u64;
        }
    }
}

/// Event statistics for one iteration on the graph's current spins.
pub fn analyze(graph: &IsingGraph, design: Design, cfg: ArchConfig) -> Result<ScheduleTrace, ArchError> {
    let mut engine = ArchEngine::new(graph, design, cfg)?;
    engine.evaluate(graph.spins())?;
    Ok(engine.last.take().expect("evaluate records a trace"))
}

#[derive(Clone, Debug)]
pub struct ArchSolve {
    pub result: SolveResult,
    pub iterations: Vec<IterationStats>,
    pub rounds: usize,
}

/// Anneals `graph` with local fields computed by the `design` model.
pub fn solve_arch(
    graph: &IsingGraph,
    design: Design,
    cfg: ArchConfig,
    anneal: &AnnealConfig,
) -> Result<ArchSolve, ArchError> {
    let mut engine = ArchEngine::new(graph, design, cfg)?;
    let result = solve_with(&mut engine, graph.spins(), anneal)?;
    Ok(ArchSolve {
        result,
        iterations: engine.history,
        rounds: engine.rounds,
    })
}
