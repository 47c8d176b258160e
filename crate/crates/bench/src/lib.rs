//! Deterministic fixtures for the benchmarks.
//!
//! Everything is seeded so successive benchmark runs measure the same
//! inputs; noise realizations come from the same counter-mode generator
//! family the simulator uses.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bmst_core::bmst::bmst_encode;
use bmst_core::channel::bpsk;
use bmst_core::{BinaryVector, BmstConfig, ChannelModel, TbccCode};

/// The headline sub-frame size.
pub const K: usize = 32;

/// The headline transmission setup with a short frame.
pub fn headline_setup(l: usize) -> BmstConfig {
    let code = TbccCode::new(K).expect("k above memory");
    BmstConfig::new(code, l, 17).expect("l is positive")
}

/// A fixed information word.
pub fn info_word(seed: u64) -> BinaryVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BinaryVector::random(K, &mut rng)
}

/// One noisy sub-frame: a random word of the basic code at the given SNR.
pub fn noisy_block(snr_db: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let code = TbccCode::new(K).expect("k above memory");
    let word = BinaryVector::random(K, &mut rng);
    let coded = code.encode(&word).expect("word length matches");
    ChannelModel::from_snr_db(snr_db).add_noise(&bpsk(&coded), &mut rng)
}

/// A whole received frame of `l + 1` noisy blocks.
pub fn noisy_frame(cfg: &BmstConfig, snr_db: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = cfg.code().k();
    let words: Vec<BinaryVector> = (0..cfg.l())
        .map(|_| BinaryVector::random(k, &mut rng))
        .collect();
    let model = ChannelModel::from_snr_db(snr_db);
    bmst_encode(cfg, &words)
        .expect("frame shape matches")
        .iter()
        .map(|c| model.add_noise(&bpsk(c), &mut rng))
        .collect()
}
