//! The basic code: a rate-1/2 tail-biting convolutional code.
//!
//! Generator polynomials are stored as integers with bit `j` holding the
//! coefficient of `D^j`. When a generator is written as a binary string the
//! leftmost character is the `D^0` coefficient, so `10111` means
//! `1 + D^2 + D^3 + D^4` and packs to the integer 29. The default code is
//! memory 4 with `g1 = 29` and `g2 = 19` (`11001`, i.e. `1 + D + D^4`).
//!
//! Tail-biting closes the trellis into a circle: the shift register starts
//! preloaded with the last `m` information bits, so the encoder path begins
//! and ends in the same state and no termination bits are spent. Encoding is
//! circular convolution of the information word with each generator.

use crate::gf2::BinaryVector;
use crate::{Error, Result};

/// Maximum memory order accepted for a trellis (2^16 states).
const MAX_MEMORY: usize = 16;

/// Exhaustive codebook enumeration is refused above this message length.
pub const MAX_ENUMERATION_K: usize = 20;

/// Precomputed transition tables of a rate-1/2 feedforward trellis.
///
/// State convention: bit `j-1` of the state holds the input bit from `j`
/// steps ago, so the most recent past bit sits in the LSB. Stepping with
/// input `b` shifts left and inserts `b`.
#[derive(Clone, Debug)]
pub struct Trellis {
    memory: usize,
    n_states: usize,
    generators: [u32; 2],
    /// `next[2 * s + b]`
    next: Vec<u16>,
    /// `out[2 * s + b]` = [g1 output bit, g2 output bit]
    out: Vec<[u8; 2]>,
    /// BPSK image of `out`, kept as f64 so branch metrics skip the bit map.
    signs: Vec<[f64; 2]>,
}

impl Trellis {
    pub fn new(memory: usize, generators: [u32; 2]) -> Result<Self> {
        if memory == 0 || memory > MAX_MEMORY {
            return Err(Error::InvalidCode(format!(
                "memory must be in 1..={}, got {}",
                MAX_MEMORY, memory
            )));
        }
        for g in generators {
            if g == 0 {
                return Err(Error::InvalidCode("generator polynomial is zero".into()));
            }
            if g >> (memory + 1) != 0 {
                return Err(Error::InvalidCode(format!(
                    "generator {:#b} has degree above the memory order {}",
                    g, memory
                )));
            }
        }
        let n_states = 1usize << memory;
        let mask = (n_states - 1) as u32;
        let mut next = Vec::with_capacity(2 * n_states);
        let mut out = Vec::with_capacity(2 * n_states);
        let mut signs = Vec::with_capacity(2 * n_states);
        for s in 0..n_states as u32 {
            for b in 0..2u32 {
                // window bit 0 is the fresh input, bits 1..=m the state
                let w = b | (s << 1);
                let o1 = (w & generators[0]).count_ones() as u8 & 1;
                let o2 = (w & generators[1]).count_ones() as u8 & 1;
                next.push((((s << 1) | b) & mask) as u16);
                out.push([o1, o2]);
                signs.push([1.0 - 2.0 * o1 as f64, 1.0 - 2.0 * o2 as f64]);
            }
        }
        Ok(Self {
            memory,
            n_states,
            generators,
            next,
            out,
            signs,
        })
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn generators(&self) -> [u32; 2] {
        self.generators
    }

    #[inline]
    pub fn next_state(&self, state: usize, bit: u8) -> usize {
        self.next[2 * state + bit as usize] as usize
    }

    #[inline]
    pub fn output(&self, state: usize, bit: u8) -> [u8; 2] {
        self.out[2 * state + bit as usize]
    }

    /// Correlation of this branch's BPSK symbols with two received samples.
    #[inline]
    pub fn branch_correlation(&self, state: usize, bit: u8, y0: f64, y1: f64) -> f64 {
        let [s0, s1] = self.signs[2 * state + bit as usize];
        y0 * s0 + y1 * s1
    }
}

/// A `(2, 1, m)` tail-biting convolutional code at a fixed message length.
#[derive(Clone, Debug)]
pub struct TbccCode {
    k: usize,
    trellis: Trellis,
}

impl TbccCode {
    /// The default code: memory 4, generators `1 + D^2 + D^3 + D^4` and
    /// `1 + D + D^4`.
    pub fn new(k: usize) -> Result<Self> {
        Self::with_generators(k, 4, [0b11101, 0b10011])
    }

    /// A code with caller-chosen memory and generators. Tail-biting needs at
    /// least as many information bits as memory cells.
    pub fn with_generators(k: usize, memory: usize, generators: [u32; 2]) -> Result<Self> {
        let trellis = Trellis::new(memory, generators)?;
        if k < memory {
            return Err(Error::InvalidCode(format!(
                "message length {} is below the memory order {}",
                k, memory
            )));
        }
        Ok(Self { k, trellis })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Codeword length `n = 2k`.
    pub fn n(&self) -> usize {
        2 * self.k
    }

    pub fn memory(&self) -> usize {
        self.trellis.memory()
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    /// The state the tail-biting path starts (and ends) in: the last `m`
    /// information bits, most recent in the LSB.
    pub fn start_state(&self, u: &BinaryVector) -> usize {
        let m = self.trellis.memory();
        let mut s = 0usize;
        for j in 1..=m {
            s |= (u.bit(self.k - j) as usize) << (j - 1);
        }
        s
    }

    /// Encodes a length-`k` information word into a length-`2k` codeword.
    /// Output interleaving is generator-1 bit then generator-2 bit per step.
    pub fn encode(&self, u: &BinaryVector) -> Result<BinaryVector> {
        if u.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: u.len(),
            });
        }
        let start = self.start_state(u);
        let mut state = start;
        let mut c = Vec::with_capacity(self.n());
        for i in 0..self.k {
            let b = u.bit(i);
            let [o1, o2] = self.trellis.output(state, b);
            c.push(o1);
            c.push(o2);
            state = self.trellis.next_state(state, b);
        }
        debug_assert_eq!(state, start, "tail-biting path must close");
        BinaryVector::from_bits(c)
    }

    /// The information word whose bits are the binary digits of `index`,
    /// LSB first. Used for exhaustive enumeration.
    pub fn info_word_from_index(&self, index: u64) -> BinaryVector {
        let bits = (0..self.k).map(|i| ((index >> i) & 1) as u8).collect();
        BinaryVector::from_bits(bits).expect("bits are 0 or 1")
    }

    /// All `2^k` codewords, indexed by [`Self::info_word_from_index`].
    /// Refused for `k` above [`MAX_ENUMERATION_K`].
    pub fn codebook(&self) -> Result<Vec<BinaryVector>> {
        if self.k > MAX_ENUMERATION_K {
            return Err(Error::EnumerationTooLarge {
                k: self.k,
                limit: MAX_ENUMERATION_K,
            });
        }
        let mut book = Vec::with_capacity(1usize << self.k);
        for idx in 0..(1u64 << self.k) {
            book.push(self.encode(&self.info_word_from_index(idx))?);
        }
        Ok(book)
    }
}
