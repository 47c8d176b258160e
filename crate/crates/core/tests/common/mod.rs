//! Helpers shared by the integration test binaries.
#![allow(dead_code)]

use bmst_core::channel::bpsk_symbol;
use bmst_core::gf2::BinaryVector;
use bmst_core::tbcc::TbccCode;

/// BPSK correlation of a received block with a codeword.
pub fn correlation(y: &[f64], c: &BinaryVector) -> f64 {
    y.iter()
        .zip(c.as_slice())
        .map(|(&yi, &ci)| yi * bpsk_symbol(ci))
        .sum()
}

/// All information words ranked the way the trellis decoders rank them:
/// correlation descending, exact ties broken toward the lexicographically
/// smaller information word.
pub fn oracle_ranking(
    code: &TbccCode,
    codebook: &[BinaryVector],
    y: &[f64],
) -> Vec<(f64, BinaryVector)> {
    let mut scored: Vec<(f64, BinaryVector)> = codebook
        .iter()
        .enumerate()
        .map(|(i, c)| (correlation(y, c), code.info_word_from_index(i as u64)))
        .collect();
    scored.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| a.1.as_slice().cmp(b.1.as_slice()))
    });
    scored
}
