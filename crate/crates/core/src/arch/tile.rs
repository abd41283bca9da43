use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TileError {
    #[error("row {row} out of range for {rows} rows")]
    Row { row: usize, rows: usize },
    #[error("row content of {width} bits exceeds {row_bits} columns")]
    Width { width: usize, row_bits: usize },
    #[error("complement row {0} does not hold the inverse of its data row")]
    Complement(usize),
}

/// What a tile row holds: a slice of one spin's tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowTag {
    pub tuple: usize,
    pub segment: usize,
    pub first_neighbor: usize,
    pub neighbors: usize,
}

pub fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

pub fn get_bit(words: &[u64], k: usize) -> u8 {
    (words[k / 64] >> (k % 64) & 1) as u8
}

pub fn set_bit(words: &mut [u64], k: usize, b: u8) {
    let m = 1u64 << (k % 64);
    if b & 1 == 1 {
        words[k / 64] |= m;
    } else {
        words[k / 64] &= !m;
    }
}

/// Reads `len <= 32` bits starting at column `start`.
pub fn get_field(words: &[u64], start: usize, len: usize) -> u32 {
    if len == 0 {
        return 0;
    }
    let (w, off) = (start / 64, start % 64);
    let mut v = words[w] >> off;
    if off + len > 64 {
        v |= words[w + 1] << (64 - off);
    }
    (v & field_mask(len)) as u32
}

pub fn set_field(words: &mut [u64], start: usize, len: usize, value: u32) {
    if len == 0 {
        return;
    }
    let (w, off) = (start / 64, start % 64);
    let m = field_mask(len);
    let v = value as u64 & m;
    words[w] = (words[w] & !(m << off)) | (v << off);
    if off + len > 64 {
        let sh = 64 - off;
        words[w + 1] = (words[w + 1] & !(m >> sh)) | (v >> sh);
    }
}

fn field_mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

fn width_mask(words: &mut [u64], width: usize) {
    for (w, word) in words.iter_mut().enumerate() {
        let lo = w * 64;
        if width <= lo {
            *word = 0;
        } else if width < lo + 64 {
            *word &= (1u64 << (width - lo)) - 1;
        }
    }
}

/// Outcome of driving one read-wordline pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Activation<'a> {
    /// Per-column XNOR of stored bit and wordline bit, over the populated
    /// columns.
    pub bits: &'a [u64],
    /// Columns whose read bitline discharged.
    pub discharges: u32,
}

/// An 8T-style SRAM tile with a complement row for every data row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComputeTile {
    rows: usize,
    row_bits: usize,
    data: Vec<Vec<u64>>,
    complement: Vec<Vec<u64>>,
    widths: Vec<usize>,
    mapping: Vec<Option<RowTag>>,
}

impl ComputeTile {
    pub fn new(rows: usize, row_bits: usize) -> Self {
        let w = words_for(row_bits);
        Self {
            rows,
            row_bits,
            data: vec![vec![0; w]; rows],
            complement: vec![vec![0; w]; rows],
            widths: vec![0; rows],
            mapping: vec![None; rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn row_bits(&self) -> usize {
        self.row_bits
    }

    pub fn capacity_bits(&self) -> usize {
        self.rows * self.row_bits
    }

    pub fn mapping(&self, row: usize) -> Option<RowTag> {
        self.mapping.get(row).copied().flatten()
    }

    pub fn width(&self, row: usize) -> usize {
        self.widths[row]
    }

    pub fn used_rows(&self) -> usize {
        self.mapping.iter().filter(|m| m.is_some()).count()
    }

    pub fn clear(&mut self) {
        for r in 0..self.rows {
            self.data[r].fill(0);
            self.complement[r].fill(0);
            self.widths[r] = 0;
            self.mapping[r] = None;
        }
    }

    pub fn clear_row(&mut self, row: usize) {
        self.data[row].fill(0);
        self.complement[row].fill(0);
        self.widths[row] = 0;
        self.mapping[row] = None;
    }

    fn check_row(&self, row: usize) -> Result<(), TileError> {
        if row >= self.rows {
            Err(TileError::Row { row, rows: self.rows })
        } else {
            Ok(())
        }
    }

    /// Writes a data row and its complement. Returns the number of data
    /// cells whose value changed.
    pub fn write_row(&mut self, row: usize, bits: &[u64], width: usize, tag: RowTag) -> Result<u64, TileError> {
        self.check_row(row)?;
        if width > self.row_bits {
            return Err(TileError::Width { width, row_bits: self.row_bits });
        }
        let mut next = bits.to_vec();
        next.resize(self.data[row].len(), 0);
        width_mask(&mut next, width);
        let mut changed = 0u64;
        for (old, new) in self.data[row].iter().zip(&next) {
            changed += (old ^ new).count_ones() as u64;
        }
        let mut comp: Vec<u64> = next.iter().map(|w| !w).collect();
        width_mask(&mut comp, width);
        self.data[row] = next;
        self.complement[row] = comp;
        self.widths[row] = width;
        self.mapping[row] = Some(tag);
        Ok(changed)
    }

    pub fn row_bits_of(&self, row: usize) -> &[u64] {
        &self.data[row]
    }

    pub fn check_complements(&self) -> Result<(), TileError> {
        for r in 0..self.rows {
            let mut inv: Vec<u64> = self.data[r].iter().map(|w| !w).collect();
            width_mask(&mut inv, self.widths[r]);
            if inv != self.complement[r] {
                return Err(TileError::Complement(r));
            }
        }
        Ok(())
    }

    /// Drives RWL with `bit` and RWL' with its inverse on `row`. A column
    /// discharges when `(S AND RWL) OR (S' AND RWL')` holds, so the data row
    /// answers when the wordline bit is 1 and the complement row when it is 0.
    pub fn activate(&self, row: usize, bit: u8) -> Result<Activation<'_>, TileError> {
        self.check_row(row)?;
        let bits = if bit & 1 == 1 { &self.data[row][..] } else { &self.complement[row][..] };
        let discharges = bits.iter().map(|w| w.count_ones()).sum();
        Ok(Activation { bits, discharges })
    }

    /// Test hook: flips one stored data cell without touching its complement.
    #[cfg(test)]
    pub fn corrupt(&mut self, row: usize, col: usize) {
        let b = get_bit(&self.data[row], col);
        set_bit(&mut self.data[row], col, 1 - b);
    }
}

/// Placement of consecutive tile-row slots across the bank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interleave {
    /// Fill tile 0, then tile 1, and so on.
    Sequential,
    /// Slot `k` goes to tile `k mod tiles`.
    Strided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Placement {
    pub round: usize,
    pub tile: usize,
    pub row: usize,
}

pub fn place(slot: usize, tiles: usize, rows: usize, policy: Interleave) -> Placement {
    let per_round = tiles * rows;
    let round = slot / per_round;
    let k = slot % per_round;
    match policy {
        Interleave::Sequential => Placement { round, tile: k / rows, row: k % rows },
        Interleave::Strided => Placement { round, tile: k % tiles, row: k / tiles },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TileBank {
    pub tiles: Vec<ComputeTile>,
    pub policy: Interleave,
}

impl TileBank {
    pub fn new(tiles: usize, rows: usize, row_bits: usize, policy: Interleave) -> Self {
        Self {
            tiles: vec![ComputeTile::new(rows, row_bits); tiles],
            policy,
        }
    }

    pub fn rows_per_tile(&self) -> usize {
        self.tiles.first().map_or(0, ComputeTile::rows)
    }

    pub fn place(&self, slot: usize) -> Placement {
        place(slot, self.tiles.len(), self.rows_per_tile(), self.policy)
    }

    pub fn tiles_used(&self) -> usize {
        self.tiles.iter().filter(|t| t.used_rows() > 0).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bitcell_xnor;

    fn tag() -> RowTag {
        RowTag { tuple: 0, segment: 0, first_neighbor: 0, neighbors: 0 }
    }

    #[test]
    fn activation_matches_bitcells() {
        let mut t = ComputeTile::new(4, 100);
        let mut bits = vec![0u64; 2];
        for k in (0..70).step_by(3) {
            set_bit(&mut bits, k, 1);
        }
        t.write_row(1, &bits, 70, tag()).unwrap();
        t.check_complements().unwrap();
        for rwl in [0u8, 1] {
            let a = t.activate(1, rwl).unwrap();
            let mut count = 0;
            for c in 0..70 {
                let s = get_bit(&bits, c);
                let expect = bitcell_xnor(s, 1 - s, rwl, 1 - rwl).unwrap();
                assert_eq!(get_bit(a.bits, c), expect);
                count += expect as u32;
            }
            assert_eq!(get_bit(a.bits, 70), 0);
            assert_eq!(a.discharges, count);
        }
    }

    #[test]
    fn write_counts_changes_and_checks_width() {
        let mut t = ComputeTile::new(2, 16);
        assert_eq!(t.write_row(0, &[0b1011], 4, tag()).unwrap(), 3);
        assert_eq!(t.write_row(0, &[0b1001], 4, tag()).unwrap(), 1);
        assert!(t.write_row(0, &[0], 17, tag()).is_err());
        assert!(t.write_row(2, &[0], 1, tag()).is_err());
    }

    #[test]
    fn corruption_is_detected() {
        let mut t = ComputeTile::new(2, 16);
        t.write_row(0, &[0b1011], 4, tag()).unwrap();
        t.corrupt(0, 2);
        assert_eq!(t.check_complements(), Err(TileError::Complement(0)));
    }

    #[test]
    fn placement_policies() {
        assert_eq!(place(250, 16, 100, Interleave::Sequential), Placement { round: 0, tile: 2, row: 50 });
        assert_eq!(place(17, 16, 100, Interleave::Strided), Placement { round: 0, tile: 1, row: 1 });
        assert_eq!(place(1600, 16, 100, Interleave::Strided), Placement { round: 1, tile: 0, row: 0 });
    }

    #[test]
    fn sequential_fill_of_300_rows_uses_three_tiles() {
        let tiles: std::collections::BTreeSet<usize> =
            (0..300).map(|k| place(k, 16, 100, Interleave::Sequential).tile).collect();
        assert_eq!(tiles.len(), 3);
    }

    #[test]
    fn fields() {
        let mut w = vec![0u64; 2];
        set_field(&mut w, 60, 9, 0x179);
        assert_eq!(get_field(&w, 60, 9), 0x179);
    }
}
