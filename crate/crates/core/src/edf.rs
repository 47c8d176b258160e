//! The empirical divergence function (EDF) and the candidate soft metric.
//!
//! For a binary word `x` and real samples `y`, the EDF is the per-symbol
//! normalized log-likelihood ratio against the input-marginalized density:
//!
//! ```text
//! D(x, y) = (1/n) log2( f(y|x) / f(y) ),   f(y) = prod_i (f(y_i|0) + f(y_i|1)) / 2
//! ```
//!
//! Per symbol this collapses to `1 - log2(1 + e^(-2 t_i / sigma^2))` with
//! `t_i = phi(x_i) * y_i`, so the Gaussian normalization never appears and
//! everything is evaluated in the log domain. When `y` really is a noisy
//! version of `x` the EDF concentrates near the channel's mutual
//! information; for an unrelated word it concentrates far below zero. The
//! soft metric adds the EDF of a candidate on its own sub-frame to the EDF
//! scored by a Viterbi pass on the next sub-frame after peeling the
//! candidate's superposition layer off, and that sum is what the decoder
//! thresholds.

use crate::channel::{self, ChannelModel, RealVector};
use crate::gf2::{BinaryMatrix, BinaryVector};
use crate::slva::{viterbi, Candidate};
use crate::tbcc::TbccCode;
use crate::{Error, Result};

/// Numerically stable `ln(1 + e^z)`.
#[inline]
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// An empirical divergence value, in bits per symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdfValue {
    pub value: f64,
}

/// The two-part acceptance metric of a candidate codeword.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SoftMetric {
    /// `parts[0] + parts[1]`, the quantity compared against the threshold.
    pub value: f64,
    /// The candidate's EDF on its own sub-frame, then the EDF of the
    /// Viterbi output on the peeled next sub-frame.
    pub parts: [f64; 2],
}

/// Empirical divergence between a binary word and a block of received
/// samples, under the given channel's noise level.
pub fn edf(x: &BinaryVector, y: &[f64], model: &ChannelModel) -> Result<EdfValue> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InvalidDimension(
            "divergence of an empty block is undefined".into(),
        ));
    }
    let scale = 2.0 / model.sigma2();
    let mut total = 0.0;
    for (&bit, &yi) in x.as_slice().iter().zip(y) {
        let t = channel::bpsk_symbol(bit) * yi;
        total += softplus(-scale * t);
    }
    let n = x.len() as f64;
    Ok(EdfValue {
        value: 1.0 - total / (n * std::f64::consts::LN_2),
    })
}

/// Component-wise sign flip: `z_i = y_i * phi(c_i)`.
pub fn flip(y: &[f64], c: &BinaryVector) -> Result<RealVector> {
    channel::flip_signs(y, c)
}

/// Scores a candidate for sub-frame `t` against the received block of
/// sub-frame `t+1`.
///
/// The candidate's superposition layer `cand.codeword * R` is peeled off
/// `y1` by sign flips, a Viterbi pass decodes the peeled block, and the
/// metric is the candidate's EDF on `y0` plus the Viterbi output's EDF on
/// the peeled block. A correct candidate leaves the next sub-frame clean, so
/// both terms sit high; a wrong candidate scrambles it and drags the second
/// term down.
pub fn soft_metric(
    cand: &Candidate,
    y0: &[f64],
    y1: &[f64],
    r: &BinaryMatrix,
    code: &TbccCode,
    model: &ChannelModel,
) -> Result<SoftMetric> {
    let layer = r.vec_mul(&cand.codeword)?;
    let peeled = flip(y1, &layer)?;
    let tilde = viterbi(&peeled, code)?;
    let own = edf(&cand.codeword, y0, model)?.value;
    let next = edf(&tilde.codeword, &peeled, model)?.value;
    Ok(SoftMetric {
        value: own + next,
        parts: [own, next],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::bpsk;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn softplus_matches_naive_form_in_the_safe_range() {
        for z in [-30.0f64, -2.5, -1e-8, 0.0, 1e-8, 2.5, 30.0] {
            let naive = (1.0 + z.exp()).ln();
            assert!((softplus(z) - naive).abs() < 1e-12, "z = {}", z);
        }
        // far outside the naive range: softplus(z) ~ z and softplus(-z) ~ 0
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        assert_eq!(softplus(-800.0), 0.0);
        assert!(softplus(-800.0).is_finite() && softplus(800.0).is_finite());
    }

    #[test]
    fn zero_samples_give_zero_divergence() {
        let model = ChannelModel::from_snr_db(3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let x = BinaryVector::random(16, &mut rng);
            let d = edf(&x, &[0.0; 16], &model).unwrap();
            assert!(d.value.abs() < 1e-12);
        }
    }

    #[test]
    fn single_symbol_closed_form() {
        // x = (0), y = (+1) at 4 dB: D = log2(2 / (1 + e^(-2/sigma^2)))
        let model = ChannelModel::from_snr_db(4.0);
        let x = BinaryVector::zeros(1);
        let d = edf(&x, &[1.0], &model).unwrap();
        assert!((d.value - 0.9905386555501525).abs() < 1e-12, "{}", d.value);
    }

    #[test]
    fn divergence_depends_on_x_only_through_the_sign_pattern() {
        let model = ChannelModel::from_snr_db(2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let x = BinaryVector::random(24, &mut rng);
            let y = model.transmit(&BinaryVector::random(24, &mut rng), &mut rng);
            let direct = edf(&x, &y, &model).unwrap();
            let folded = edf(
                &BinaryVector::zeros(24),
                &flip(&y, &x).unwrap(),
                &model,
            )
            .unwrap();
            // identical sign products, identical summation order
            assert_eq!(direct, folded);
        }
    }

    #[test]
    fn divergence_is_affine_in_the_correlation() {
        // softplus(-u) = g(|u|) - u/2 with g even, so over a fixed y the EDF
        // is an increasing affine function of sum(y_i * phi(x_i)). Fit the
        // line on two words and check every codeword of a small code.
        let code = TbccCode::new(6).unwrap();
        let model = ChannelModel::from_snr_db(3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let y = model.transmit(&code.encode(&BinaryVector::random(6, &mut rng)).unwrap(), &mut rng);
        let corr = |c: &BinaryVector| -> f64 {
            y.iter()
                .zip(bpsk(c))
                .map(|(&yi, xi)| yi * xi)
                .sum()
        };
        let book = code.codebook().unwrap();
        let (c0, c1) = (&book[0], &book[1]);
        let (d0, d1) = (
            edf(c0, &y, &model).unwrap().value,
            edf(c1, &y, &model).unwrap().value,
        );
        let slope = (d1 - d0) / (corr(c1) - corr(c0));
        assert!(slope > 0.0);
        for c in &book {
            let predicted = d0 + slope * (corr(c) - corr(c0));
            let actual = edf(c, &y, &model).unwrap().value;
            assert!((actual - predicted).abs() < 1e-9, "word {}", c);
        }
    }

    #[test]
    fn viterbi_output_maximizes_the_divergence() {
        let code = TbccCode::new(8).unwrap();
        let model = ChannelModel::from_snr_db(3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let book = code.codebook().unwrap();
        for _ in 0..20 {
            let u = BinaryVector::random(8, &mut rng);
            let y = model.transmit(&code.encode(&u).unwrap(), &mut rng);
            let ml = viterbi(&y, &code).unwrap();
            let d_ml = edf(&ml.codeword, &y, &model).unwrap().value;
            for c in &book {
                let d = edf(c, &y, &model).unwrap().value;
                assert!(d <= d_ml + 1e-9);
            }
        }
    }

    #[test]
    fn transmitted_word_divergence_concentrates_near_mutual_information() {
        let model = ChannelModel::from_snr_db(4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let trials = 10_000;
        let mut mean = 0.0;
        for _ in 0..trials {
            let x = BinaryVector::random(64, &mut rng);
            let y = model.transmit(&x, &mut rng);
            mean += edf(&x, &y, &model).unwrap().value;
        }
        mean /= trials as f64;
        assert!((mean - 0.79).abs() < 0.02, "mean divergence {}", mean);
    }

    #[test]
    fn flip_hand_example_and_involution() {
        let y = vec![0.5, -1.2];
        let c: BinaryVector = "10".parse().unwrap();
        assert_eq!(flip(&y, &c).unwrap(), vec![-0.5, -1.2]);
        assert_eq!(flip(&y, &BinaryVector::zeros(2)).unwrap(), y);
        assert_eq!(flip(&flip(&y, &c).unwrap(), &c).unwrap(), y);
    }

    #[test]
    fn noiseless_soft_metric_approaches_two() {
        // exact BPSK samples and a tiny noise model: each EDF term is 1
        let code = TbccCode::new(8).unwrap();
        let n = code.n();
        let r = BinaryMatrix::random(n, n, 99).unwrap();
        let model = ChannelModel::from_snr_db(40.0);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u0 = BinaryVector::random(8, &mut rng);
        let u1 = BinaryVector::random(8, &mut rng);
        let v0 = code.encode(&u0).unwrap();
        let v1 = code.encode(&u1).unwrap();
        let c1 = v1.xor(&r.vec_mul(&v0).unwrap()).unwrap();
        let y0 = bpsk(&v0);
        let y1 = bpsk(&c1);
        let cand = Candidate {
            codeword: v0.clone(),
            info_word: u0,
            log_likelihood: 0.0,
            rank: 1,
        };
        let m = soft_metric(&cand, &y0, &y1, &r, &code, &model).unwrap();
        assert!((m.value - 2.0).abs() < 1e-9, "metric {}", m.value);
        assert!((m.parts[0] - 1.0).abs() < 1e-9);
        assert!((m.parts[1] - 1.0).abs() < 1e-9);
        assert_eq!(m.value, m.parts[0] + m.parts[1]);

        // a wrong candidate on the same noiseless frames scores far below
        let wrong_u = BinaryVector::from_bits(
            cand.info_word
                .as_slice()
                .iter()
                .map(|&b| 1 - b)
                .collect(),
        )
        .unwrap();
        let wrong = Candidate {
            codeword: code.encode(&wrong_u).unwrap(),
            info_word: wrong_u,
            log_likelihood: 0.0,
            rank: 2,
        };
        let m_wrong = soft_metric(&wrong, &y0, &y1, &r, &code, &model).unwrap();
        assert!(m_wrong.value < 0.0, "wrong candidate metric {}", m_wrong.value);
    }
}
