//! Error-rate accounting, weight enumerators, and bounds.
//!
//! Three rates describe a successive-cancellation run over frames of `L`
//! data sub-frames:
//!
//! - `subFER`: the chance a sub-frame decision goes wrong *given a clean
//!   slate*, estimated as first-error events over clean-prefix decisions. A
//!   clean-prefix decision is one made while every earlier decision in its
//!   frame was still correct; decisions after the first error face a
//!   corrupted cancellation chain and say nothing about the clean-slate
//!   error probability, so they are excluded from the denominator.
//! - `FER`: frames with at least one wrong sub-frame, over frames.
//! - `fER`: wrong sub-frames over all sub-frames (error propagation
//!   included).
//!
//! With these estimators `subFER <= FER <= L * subFER` is a counting
//! identity on every batch: each erroneous frame contributes exactly one
//! first-error event, and each frame contributes between 1 and `L`
//! clean-prefix decisions. The companion `fER <~ (L/2) * subFER` is only an
//! approximate guideline and is checked statistically, never asserted.

use crate::channel::{q_function, ChannelModel};
use crate::gf2::BinaryVector;
use crate::tbcc::TbccCode;
use crate::{Error, Result};

/// Mergeable tallies of one or more simulation batches.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorCounters {
    pub frames_sent: u64,
    pub frames_in_error: u64,
    pub subframes_sent: u64,
    pub subframes_in_error: u64,
    /// Sub-frame decisions made while every earlier decision in the frame
    /// was correct; the denominator of `subFER`.
    pub clean_prefix_subframes: u64,
    /// `first_error_positions[t]`: frames whose first wrong decision was at
    /// sub-frame `t`.
    pub first_error_positions: Vec<u64>,
}

impl ErrorCounters {
    pub fn new() -> Self {
        Self::default()
    }

    /// Tallies one frame from its comparison outcome. `first_error` is the
    /// index of the earliest wrong decision, `wrong_subframes` the total
    /// number of wrong decisions.
    pub fn record_outcome(&mut self, l: usize, first_error: Option<usize>, wrong_subframes: u64) {
        debug_assert!(wrong_subframes as usize <= l);
        self.frames_sent += 1;
        self.subframes_sent += l as u64;
        match first_error {
            Some(t) => {
                debug_assert!(t < l && wrong_subframes >= 1);
                self.frames_in_error += 1;
                self.subframes_in_error += wrong_subframes;
                self.clean_prefix_subframes += t as u64 + 1;
                if self.first_error_positions.len() <= t {
                    self.first_error_positions.resize(t + 1, 0);
                }
                self.first_error_positions[t] += 1;
            }
            None => {
                debug_assert_eq!(wrong_subframes, 0);
                self.clean_prefix_subframes += l as u64;
            }
        }
    }

    /// Compares a decoded frame against the transmitted words and tallies
    /// it.
    pub fn record_frame(&mut self, transmitted: &[BinaryVector], decoded: &[BinaryVector]) {
        assert_eq!(transmitted.len(), decoded.len());
        let mut first_error = None;
        let mut wrong = 0u64;
        for (t, (u, d)) in transmitted.iter().zip(decoded).enumerate() {
            if u != d {
                wrong += 1;
                if first_error.is_none() {
                    first_error = Some(t);
                }
            }
        }
        self.record_outcome(transmitted.len(), first_error, wrong);
    }

    /// Accumulates another batch into this one.
    pub fn merge(&mut self, other: &Self) {
        self.frames_sent += other.frames_sent;
        self.frames_in_error += other.frames_in_error;
        self.subframes_sent += other.subframes_sent;
        self.subframes_in_error += other.subframes_in_error;
        self.clean_prefix_subframes += other.clean_prefix_subframes;
        if self.first_error_positions.len() < other.first_error_positions.len() {
            self.first_error_positions
                .resize(other.first_error_positions.len(), 0);
        }
        for (t, &count) in other.first_error_positions.iter().enumerate() {
            self.first_error_positions[t] += count;
        }
    }
}

/// The three rates of one batch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorRates {
    /// First-error events over clean-prefix decisions.
    pub subfer: f64,
    /// Erroneous frames over frames.
    pub fer: f64,
    /// Erroneous sub-frames over sub-frames, error propagation included.
    pub fer_subframes: f64,
}

/// Computes `(subFER, FER, fER)` from counters.
pub fn error_rates(c: &ErrorCounters) -> Result<ErrorRates> {
    if c.frames_sent == 0 || c.subframes_sent == 0 || c.clean_prefix_subframes == 0 {
        return Err(Error::EmptyCounters(
            "rates need at least one recorded frame".into(),
        ));
    }
    Ok(ErrorRates {
        subfer: c.frames_in_error as f64 / c.clean_prefix_subframes as f64,
        fer: c.frames_in_error as f64 / c.frames_sent as f64,
        fer_subframes: c.subframes_in_error as f64 / c.subframes_sent as f64,
    })
}

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64; // two-sided 95%
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let margin = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - margin).max(0.0), (center + margin).min(1.0))
}

/// The bound checks of one batch.
#[derive(Clone, Copy, Debug)]
pub struct BoundReport {
    pub rates: ErrorRates,
    /// `subFER <= FER <= L * subFER`, which must hold on every batch; a
    /// false value means the counters themselves are inconsistent.
    pub containment_holds: bool,
    /// Point-estimate check of `fER <= (L/2) * subFER`.
    pub half_l_satisfied: bool,
    /// The same check with 95% Wilson slack on both sides: the lower
    /// confidence bound of fER against `(L/2)` times the upper confidence
    /// bound of subFER. Advisory only.
    pub half_l_within_confidence: bool,
}

/// Checks the containment identity and the `(L/2)` guideline on a batch.
pub fn fer_bound_check(c: &ErrorCounters, l: usize) -> Result<BoundReport> {
    let rates = error_rates(c)?;
    let containment_holds =
        rates.subfer <= rates.fer && rates.fer <= l as f64 * rates.subfer;
    let half_l = l as f64 / 2.0;
    let half_l_satisfied = rates.fer_subframes <= half_l * rates.subfer;
    let (fer_lo, _) = wilson_interval(c.subframes_in_error, c.subframes_sent);
    let (_, subfer_hi) = wilson_interval(c.frames_in_error, c.clean_prefix_subframes);
    let half_l_within_confidence = fer_lo <= half_l * subfer_hi;
    Ok(BoundReport {
        rates,
        containment_holds,
        half_l_satisfied,
        half_l_within_confidence,
    })
}

// ---------------------------------------------------------------------------
// Weight enumerators
// ---------------------------------------------------------------------------

/// A weight enumerating function: `coeffs[d]` counts (or ensemble-averages)
/// words of Hamming weight `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct WefPolynomial {
    coeffs: Vec<f64>,
}

impl WefPolynomial {
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|&c| !c.is_finite() || c < 0.0) {
            return Err(Error::InvalidConfig(
                "weight enumerator coefficients must be finite and non-negative".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    pub fn coeff(&self, d: usize) -> f64 {
        self.coeffs.get(d).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|&c| c != 0.0)
            .unwrap_or(0)
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// `A(X)` of the basic code over its nonzero codewords, by exhaustive
/// enumeration. Shares the enumeration guard of [`TbccCode::codebook`].
pub fn basic_wef(code: &TbccCode) -> Result<WefPolynomial> {
    let mut coeffs = vec![0.0; code.n() + 1];
    for codeword in code.codebook()? {
        let w = codeword.weight();
        if w > 0 {
            coeffs[w] += 1.0;
        }
    }
    WefPolynomial::from_coeffs(coeffs)
}

/// Ensemble weight enumerator of the two-block truncated code under a
/// totally random transform: `B(X) = 2^(k-n) (1+X)^n A(X)`.
///
/// `A` is expected to enumerate nonzero words only (constant term zero).
/// The `(1+X)^n` factor is applied as `n` successive multiplications, which
/// keeps every intermediate coefficient an exact integer, so small-code
/// results are exact despite the floating-point carrier.
pub fn ensemble_wef(a: &WefPolynomial, n: usize, k: usize) -> WefPolynomial {
    let mut coeffs = a.coeffs.clone();
    coeffs.resize(a.coeffs.len() + n, 0.0);
    for _ in 0..n {
        for d in (1..coeffs.len()).rev() {
            coeffs[d] += coeffs[d - 1];
        }
    }
    let scale = (k as f64 - n as f64).exp2();
    for c in &mut coeffs {
        *c *= scale;
    }
    WefPolynomial { coeffs }
}

/// Union bound on the first-block error rate under exact ML decoding of the
/// truncated code: `sum_d B_d Q(sqrt(d)/sigma)`. Words differing in `d`
/// places sit `2 sqrt(d)` apart in BPSK signal space, giving the pairwise
/// error probability `Q(sqrt(d)/sigma)`.
pub fn union_bound(b: &WefPolynomial, model: &ChannelModel) -> f64 {
    let sigma = model.sigma();
    b.coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(d, &bd)| bd * q_function((d as f64).sqrt() / sigma))
        .sum()
}
