//! Vectors and matrices over GF(2).
//!
//! Information words and codewords are [`BinaryVector`]s. The block-level
//! memory of the transmitter is a fixed square [`BinaryMatrix`] drawn once
//! per session from a 64-bit seed, so both ends of the link can reconstruct
//! it without ever exchanging the matrix itself.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// A vector over GF(2), one byte per bit.
///
/// Bits are stored unpacked (values 0 or 1) because vectors here are short
/// (tens to hundreds of bits) and the decoder indexes them constantly; the
/// packed representation is reserved for matrix rows where the XOR-fold
/// actually pays off.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryVector {
    bits: Vec<u8>,
}

impl BinaryVector {
    /// Builds a vector from raw bits. Every entry must be 0 or 1.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidDimension(
                "binary vector entries must be 0 or 1".into(),
            ));
        }
        Ok(Self { bits })
    }

    /// The all-zero vector of the given length.
    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![0; len] }
    }

    /// Draws a uniformly random vector using the caller's generator.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let bits = (0..len).map(|_| rng.random::<bool>() as u8).collect();
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn set_bit(&mut self, i: usize, value: u8) {
        debug_assert!(value <= 1);
        self.bits[i] = value;
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    /// Component-wise XOR. Both vectors must have the same length.
    pub fn xor(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(Self { bits })
    }
}

impl fmt::Display for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryVector({})", self)
    }
}

impl FromStr for BinaryVector {
    type Err = Error;

    /// Parses an ASCII string of '0' and '1' characters.
    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                _ => {
                    return Err(Error::InvalidDimension(format!(
                        "unexpected character {:?} at position {} in binary string",
                        c, i
                    )))
                }
            }
        }
        Ok(Self { bits })
    }
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// A dense matrix over GF(2) with rows packed into 64-bit words.
///
/// The only product the transmitter needs is row-vector times matrix, which
/// packs down to XOR-folding the rows selected by the vector's one-bits.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    /// Row-major storage, `words_per_row` words per row, LSB-first within a
    /// word. Bits past `cols` in the last word of a row are always zero.
    data: Vec<u64>,
}

impl BinaryMatrix {
    /// Draws an i.i.d. Bernoulli(1/2) matrix from a 64-bit seed.
    ///
    /// The seed fully determines the matrix: the bits come from a
    /// `ChaCha8Rng` seeded with `seed_from_u64`, one word of output per
    /// packed storage word, row by row. ChaCha output is specified by the
    /// cipher itself, so the mapping from seed to matrix is stable across
    /// platforms and releases.
    pub fn random(rows: usize, cols: usize, seed: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(
                "matrix dimensions must be positive".into(),
            ));
        }
        let words_per_row = cols.div_ceil(64);
        let tail_bits = cols - (words_per_row - 1) * 64;
        let tail_mask = if tail_bits == 64 {
            u64::MAX
        } else {
            (1u64 << tail_bits) - 1
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::with_capacity(rows * words_per_row);
        for _ in 0..rows {
            for w in 0..words_per_row {
                let mut word: u64 = rng.random();
                if w == words_per_row - 1 {
                    word &= tail_mask;
                }
                data.push(word);
            }
        }
        Ok(Self {
            rows,
            cols,
            words_per_row,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bit(&self, row: usize, col: usize) -> u8 {
        assert!(row < self.rows && col < self.cols);
        let word = self.data[row * self.words_per_row + col / 64];
        ((word >> (col % 64)) & 1) as u8
    }

    /// Row-vector times matrix: `v * M` where `v` has `rows()` entries and
    /// the result has `cols()` entries.
    pub fn vec_mul(&self, v: &BinaryVector) -> Result<BinaryVector> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: v.len(),
            });
        }
        let mut acc = vec![0u64; self.words_per_row];
        for (i, &b) in v.as_slice().iter().enumerate() {
            if b == 1 {
                let row = &self.data[i * self.words_per_row..(i + 1) * self.words_per_row];
                for (a, &w) in acc.iter_mut().zip(row) {
                    *a ^= w;
                }
            }
        }
        let mut bits = Vec::with_capacity(self.cols);
        for col in 0..self.cols {
            bits.push(((acc[col / 64] >> (col % 64)) & 1) as u8);
        }
        Ok(BinaryVector { bits })
    }
}

impl fmt::Debug for BinaryMatrix {
    /// Writes each row as a '0'/'1' string, one row per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                write!(f, "{}", self.bit(r, c))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
