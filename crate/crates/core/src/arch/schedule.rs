//! Cycle-level timing of one spin's work inside one tile.
//!
//! Cycles are numbered from 1 within a fragment. Phase 1 is the in-array
//! XNOR, phase 2 the queue (or bypass), phase 3 the shift-add with the sign
//! decision, phase 4 accumulation onto the field-initialized adder, and
//! phase 5 the spin update.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Design;

pub const P1: u8 = 1 << 0;
pub const P2: u8 = 1 << 1;
pub const P3: u8 = 1 << 2;
pub const P4: u8 = 1 << 3;
pub const P5: u8 = 1 << 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleActivity {
    pub phase_mask: u8,
    pub rwl_count: u32,
    pub col_enables: u32,
    pub queue_occ: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentSchedule {
    pub design: Design,
    /// Neighbors (n1, n2) or row segments (n3) handled in this fragment.
    pub units: usize,
    pub resolution: u32,
    pub p1_cycles: u64,
    pub first_p3: Option<u64>,
    pub last_p5: u64,
    pub queue_capacity: usize,
    pub queue_max: usize,
    pub cycles: BTreeMap<u64, CycleActivity>,
}

/// XNOR queue capacity for a fragment with `n` neighbors.
pub fn queue_capacity(design: Design, n: usize, r: u32) -> usize {
    match design {
        Design::N1a => n * (r as usize + 1),
        Design::N1b => r as usize,
        Design::N2 | Design::N3 => 0,
    }
}

struct Builder {
    cycles: BTreeMap<u64, CycleActivity>,
}

impl Builder {
    fn at(&mut self, c: u64) -> &mut CycleActivity {
        self.cycles.entry(c).or_default()
    }

    fn phase(&mut self, c: u64, mask: u8) {
        self.at(c).phase_mask |= mask;
    }
}

pub fn fragment_schedule(design: Design, units: usize, r: u32) -> FragmentSchedule {
    let mut b = Builder { cycles: BTreeMap::new() };
    let n = units as u64;
    let rr = r as u64;
    let cap = queue_capacity(design, units, r);
    let mut first_p3 = None;
    let p1_cycles;
    let last_p5;

    if units == 0 {
        // No neighbors: the adder passes the field straight through.
        p1_cycles = 1;
        b.phase(1, P4);
        b.phase(2, P5);
        last_p5 = 2;
    } else {
        match design {
            Design::N1a | Design::N1b => {
                // (cycle, neighbor, bit) for every activation.
                let mut order = Vec::with_capacity(units * r as usize);
                for k in 0..rr {
                    for m in 0..n {
                        let c = match design {
                            Design::N1a => k * n + m + 1,
                            _ => m * rr + k + 1,
                        };
                        order.push((c, m, k));
                    }
                }
                let p3_of = |m: u64| match design {
                    Design::N1a => (rr - 1) * n + m + 1,
                    _ => m * rr + rr,
                };
                let slots = match design {
                    Design::N1a => rr + 1,
                    _ => rr,
                };
                // Occupancy deltas: reserve at a neighbor's first bit, free
                // after its shift-add cycle.
                let mut delta: BTreeMap<u64, i64> = BTreeMap::new();
                for &(c, m, k) in &order {
                    let a = b.at(c);
                    a.phase_mask |= P1 | P2;
                    a.rwl_count += 2;
                    a.col_enables += 1;
                    if k == 0 {
                        *delta.entry(c).or_default() += slots as i64;
                        *delta.entry(p3_of(m) + 1).or_default() -= slots as i64;
                    }
                }
                for m in 0..n {
                    let p3 = p3_of(m);
                    b.phase(p3, P3);
                    b.phase(p3 + 1, P4);
                    first_p3 = Some(first_p3.map_or(p3, |f: u64| f.min(p3)));
                }
                p1_cycles = n * rr;
                last_p5 = n * rr + 2;
                b.phase(last_p5, P5);
                let mut occ = 0i64;
                let end = last_p5;
                for c in 1..=end {
                    occ += delta.get(&c).copied().unwrap_or(0);
                    if occ > 0 {
                        b.at(c).queue_occ = occ as u32;
                    }
                }
            }
            Design::N2 => {
                for m in 0..n {
                    let a = b.at(m + 1);
                    a.phase_mask |= P1 | P2;
                    a.rwl_count += 2;
                    a.col_enables += r;
                    b.phase(m + 2, P3);
                    b.phase(m + 3, P4);
                }
                first_p3 = Some(2);
                p1_cycles = n;
                last_p5 = n + 3;
                b.phase(last_p5, P5);
            }
            Design::N3 => {
                for g in 0..n {
                    let a = b.at(g + 1);
                    a.phase_mask |= P1 | P2;
                    a.rwl_count += 2;
                    b.phase(g + 2, P3);
                    b.phase(g + 3, P4);
                }
                first_p3 = Some(2);
                p1_cycles = n;
                last_p5 = n + 3;
                b.phase(last_p5, P5);
            }
        }
    }

    let queue_max = b.cycles.values().map(|a| a.queue_occ as usize).max().unwrap_or(0);
    assert!(queue_max <= cap, "queue overflow: {queue_max} > {cap}");
    FragmentSchedule {
        design,
        units,
        resolution: r,
        p1_cycles,
        first_p3,
        last_p5,
        queue_capacity: cap,
        queue_max,
        cycles: b.cycles,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n1_examples() {
        let a = fragment_schedule(Design::N1a, 2, 3);
        assert_eq!(a.p1_cycles, 6);
        assert_eq!(a.first_p3, Some(5));
        assert_eq!(a.queue_max, 8);
        let b = fragment_schedule(Design::N1b, 2, 3);
        assert_eq!(b.p1_cycles, 6);
        assert_eq!(b.first_p3, Some(3));
        assert_eq!(b.queue_max, 3);
        let a1 = fragment_schedule(Design::N1a, 1, 1);
        let b1 = fragment_schedule(Design::N1b, 1, 1);
        assert_eq!((a1.p1_cycles, a1.first_p3), (1, Some(1)));
        assert_eq!((b1.p1_cycles, b1.first_p3), (1, Some(1)));
    }

    #[test]
    fn n2_and_n3_cycles() {
        let s = fragment_schedule(Design::N2, 8, 4);
        assert_eq!(s.p1_cycles, 8);
        assert!(s.cycles.values().filter(|a| a.phase_mask & P1 != 0).all(|a| a.col_enables == 4));
        assert_eq!(fragment_schedule(Design::N2, 1, 7).p1_cycles, 1);
        assert_eq!(fragment_schedule(Design::N3, 1, 4).p1_cycles, 1);
        assert_eq!(fragment_schedule(Design::N3, 1, 4).last_p5, 4);
    }

    #[test]
    fn isolated_spin_takes_one_cycle() {
        for d in Design::ALL {
            assert_eq!(fragment_schedule(d, 0, 4).p1_cycles, 1);
        }
    }

    #[test]
    fn one_activation_per_p1_cycle_for_n1() {
        let s = fragment_schedule(Design::N1a, 5, 4);
        let p1: Vec<_> = s.cycles.values().filter(|a| a.phase_mask & P1 != 0).collect();
        assert_eq!(p1.len(), 20);
        assert!(p1.iter().all(|a| a.rwl_count == 2 && a.col_enables == 1));
    }
}
