//! Bit-exact model of the in-memory dot products.
//!
//! Spins are stored as bit 1 for +1 and bit 0 for -1. Coefficients are
//! R-bit two's complement words. Multiplying by a spin becomes a bitwise
//! XNOR with the spin bit plus a conditional increment, and products are
//! carried at R+1 bits so that `-(-2^(R-1))` is representable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ising::graph::{check_resolution, resolution_range};
use crate::ising::{GraphError, Spin};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitError {
    #[error(transparent)]
    Range(#[from] GraphError),
    #[error("complement rows inconsistent: stored={stored} stored'={stored_complement} rwl={rwl} rwl'={rwl_complement}")]
    Corrupt {
        stored: u8,
        stored_complement: u8,
        rwl: u8,
        rwl_complement: u8,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncodedSpin {
    pub bit: u8,
}

impl EncodedSpin {
    pub fn encode(s: Spin) -> Self {
        Self { bit: u8::from(s.is_up()) }
    }

    pub fn decode(self) -> Spin {
        Spin::from(self.bit & 1 == 1)
    }

    pub fn is_negative(self) -> bool {
        self.bit & 1 == 0
    }
}

impl From<Spin> for EncodedSpin {
    fn from(s: Spin) -> Self {
        Self::encode(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncodedIc {
    pub bits: u32,
    pub resolution: u32,
}

pub fn mask(r: u32) -> u32 {
    if r >= 32 {
        u32::MAX
    } else {
        (1u32 << r) - 1
    }
}

/// Reads the low `width` bits of `word` as two's complement.
pub fn sign_extend(word: u64, width: u32) -> i64 {
    let shift = 64 - width;
    ((word << shift) as i64) >> shift
}

pub fn encode_ic(value: i64, r: u32) -> Result<EncodedIc, BitError> {
    check_resolution(r)?;
    let (lo, hi) = resolution_range(r);
    if value < lo || value > hi {
        return Err(GraphError::ValueRange { value, resolution: r }.into());
    }
    Ok(EncodedIc {
        bits: (value as u32) & mask(r),
        resolution: r,
    })
}

impl EncodedIc {
    pub fn decode(self) -> i64 {
        sign_extend(self.bits as u64, self.resolution)
    }

    pub fn bit(self, k: u32) -> u8 {
        (self.bits >> k & 1) as u8
    }
}

pub fn decode_ic(ic: EncodedIc) -> i64 {
    ic.decode()
}

/// Bitwise XNOR of an R-bit word with a broadcast spin bit.
pub fn xnor_word(bits: u32, spin_bit: u8, r: u32) -> u32 {
    let broadcast = if spin_bit & 1 == 1 { mask(r) } else { 0 };
    !(bits ^ broadcast) & mask(r)
}

/// Sign-extends an R-bit word to R+1 bits, adds the increment, and reads the
/// R+1-bit result as a signed integer.
pub fn finish_product(word: u32, r: u32, plus_one: bool) -> i64 {
    let wide = (sign_extend(word as u64, r) as u64) & ((1u64 << (r + 1)) - 1);
    let sum = (wide + u64::from(plus_one)) & ((1u64 << (r + 1)) - 1);
    sign_extend(sum, r + 1)
}

/// `J * s_j` through the XNOR path.
pub fn xnor_dot(j: EncodedIc, sigma_j: EncodedSpin) -> i64 {
    let word = xnor_word(j.bits, sigma_j.bit, j.resolution);
    finish_product(word, j.resolution, sigma_j.is_negative())
}

/// Which of the four datapath variants produced a product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DotProductPath {
    XnorDirect,
    XnorPlusOne,
    XorDirect,
    XorPlusOne,
}

impl DotProductPath {
    /// Path for a given target spin and spin-equality bit.
    pub fn select(sigma_i: EncodedSpin, eq: u8) -> Self {
        match (eq & 1 == 1, sigma_i.is_negative()) {
            (true, false) => DotProductPath::XnorDirect,
            (true, true) => DotProductPath::XnorPlusOne,
            (false, false) => DotProductPath::XorPlusOne,
            (false, true) => DotProductPath::XorDirect,
        }
    }

    pub fn plus_one(self) -> bool {
        matches!(self, DotProductPath::XnorPlusOne | DotProductPath::XorPlusOne)
    }

    pub fn is_xor(self) -> bool {
        matches!(self, DotProductPath::XorDirect | DotProductPath::XorPlusOne)
    }
}

pub fn spin_equality(sigma_i: EncodedSpin, sigma_j: EncodedSpin) -> u8 {
    !(sigma_i.bit ^ sigma_j.bit) & 1
}

/// Product from an XNOR word computed against `s_i` instead of `s_j`.
///
/// When the spins agree the word is already the XNOR with `s_j`. When they
/// differ it is the XNOR with the wrong spin, so the complement (XOR) is
/// taken, and the increment follows the sign of `s_j`.
pub fn reuse_aware_from_xnor(word: u32, eq: u8, sigma_i: EncodedSpin, r: u32) -> (i64, DotProductPath) {
    let path = DotProductPath::select(sigma_i, eq);
    let w = if path.is_xor() { !word & mask(r) } else { word };
    (finish_product(w, r, path.plus_one()), path)
}

/// `J * s_j` through the mixed-stationary path, where the array holds `J`
/// and `s_j` and is driven with `s_i`.
pub fn reuse_aware_dot(j: EncodedIc, sigma_i: EncodedSpin, sigma_j: EncodedSpin) -> (i64, DotProductPath) {
    let word = xnor_word(j.bits, sigma_i.bit, j.resolution);
    reuse_aware_from_xnor(word, spin_equality(sigma_i, sigma_j), sigma_i, j.resolution)
}

/// Read-bitline outcome of one 8T cell pair: `(S AND J) OR (S' AND J')`.
pub fn bitcell_xnor(stored: u8, stored_complement: u8, rwl: u8, rwl_complement: u8) -> Result<u8, BitError> {
    let bits = [stored, stored_complement, rwl, rwl_complement];
    if bits.iter().any(|&b| b > 1) || stored == stored_complement || rwl == rwl_complement {
        return Err(BitError::Corrupt {
            stored,
            stored_complement,
            rwl,
            rwl_complement,
        });
    }
    Ok((stored & rwl) | (stored_complement & rwl_complement))
}

/// `xnor_dot` rebuilt one bitcell at a time.
pub fn bit_serial_dot(j: EncodedIc, sigma_j: EncodedSpin) -> i64 {
    let r = j.resolution;
    let s = sigma_j.bit & 1;
    let mut word = 0u32;
    for k in 0..r {
        let b = j.bit(k);
        let out = bitcell_xnor(b, 1 - b, s, 1 - s).expect("complements are consistent");
        word |= (out as u32) << k;
    }
    finish_product(word, r, sigma_j.is_negative())
}
