//! Block Markov superposition transmission: stream encoding and the
//! sliding-window successive-cancellation decoder.
//!
//! Encoding keeps one block of memory. With `v^(-1) = 0`:
//!
//! ```text
//! v^(t) = encode(u^(t))          t = 0 .. L-1
//! c^(t) = v^(t) + v^(t-1) R      (GF(2), R the fixed random transform)
//! c^(L) = v^(L-1) R              termination sub-frame, no fresh data
//! ```
//!
//! Decoding slides a window of two received blocks. For sub-frame `t` the
//! decoder list-decodes the peeled block `z`, scores every candidate with
//! the two-part divergence metric against the following block, and accepts
//! as soon as the metric clears the threshold; if the list cap is reached
//! first, the best-scoring candidate wins. The accepted codeword's layer is
//! then peeled off the following block by sign flips, and the window slides.
//! A wrong decision corrupts the peeled block and can propagate; that is
//! inherent to successive cancellation and is deliberately not masked.

use crate::channel::{bpsk_symbol, ChannelModel, RealVector};
use crate::edf::soft_metric;
use crate::gf2::{BinaryMatrix, BinaryVector};
use crate::slva::SlvaSession;
use crate::tbcc::TbccCode;
use crate::{Error, Result};

/// Transmitter-side parameters: the basic code, the number of data
/// sub-frames per frame, and the seed of the random transform.
#[derive(Clone, Debug)]
pub struct BmstConfig {
    code: TbccCode,
    l: usize,
    r_seed: u64,
    r: BinaryMatrix,
}

impl BmstConfig {
    pub fn new(code: TbccCode, l: usize, r_seed: u64) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidConfig(
                "a frame needs at least one data sub-frame".into(),
            ));
        }
        let n = code.n();
        let r = BinaryMatrix::random(n, n, r_seed)?;
        Ok(Self { code, l, r_seed, r })
    }

    pub fn code(&self) -> &TbccCode {
        &self.code
    }

    /// Data sub-frames per frame (the termination sub-frame is extra).
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn r_seed(&self) -> u64 {
        self.r_seed
    }

    pub fn transform(&self) -> &BinaryMatrix {
        &self.r
    }

    /// `k L / (n (L + 1))`: the basic code's rate times the termination
    /// overhead factor, always below the basic rate.
    pub fn total_rate(&self) -> f64 {
        let k = self.code.k() as f64;
        let n = self.code.n() as f64;
        let l = self.l as f64;
        k * l / (n * (l + 1.0))
    }
}

/// Receiver-side parameters.
#[derive(Clone, Copy, Debug)]
pub struct DecoderConfig {
    /// Acceptance threshold on the soft metric, in bits per symbol.
    /// `f64::NEG_INFINITY` turns every sub-frame into a plain Viterbi
    /// decision; `f64::INFINITY` always exhausts the list.
    pub threshold: f64,
    /// Candidate list cap per sub-frame.
    pub l_max: usize,
    pub model: ChannelModel,
}

impl DecoderConfig {
    pub fn new(threshold: f64, l_max: usize, model: ChannelModel) -> Result<Self> {
        if l_max == 0 {
            return Err(Error::InvalidConfig("list cap must be at least 1".into()));
        }
        if threshold.is_nan() {
            return Err(Error::InvalidConfig("threshold must not be NaN".into()));
        }
        Ok(Self {
            threshold,
            l_max,
            model,
        })
    }
}

/// What happened while deciding one sub-frame.
#[derive(Clone, Debug)]
pub struct SubframeLog {
    /// Candidates drawn, in `1..=l_max`.
    pub list_size: usize,
    /// Best soft metric seen.
    pub m_max: f64,
    /// Whether the winner actually cleared the threshold (false means the
    /// list ran out and the argmax was delivered anyway).
    pub passed_threshold: bool,
    /// The decision.
    pub info_word: BinaryVector,
}

/// Per-frame decoding trace, one entry per data sub-frame.
#[derive(Clone, Debug, Default)]
pub struct FrameLog {
    pub subframes: Vec<SubframeLog>,
}

impl FrameLog {
    /// Sum of list sizes across sub-frames; the Monte Carlo harness divides
    /// by the sub-frame count for the average list size.
    pub fn total_list_size(&self) -> usize {
        self.subframes.iter().map(|s| s.list_size).sum()
    }
}

/// Encodes `L` information words into `L + 1` transmitted sub-frames.
pub fn bmst_encode(cfg: &BmstConfig, u: &[BinaryVector]) -> Result<Vec<BinaryVector>> {
    if u.len() != cfg.l {
        return Err(Error::FrameCountMismatch {
            expected: cfg.l,
            got: u.len(),
        });
    }
    let n = cfg.code.n();
    let mut frames = Vec::with_capacity(cfg.l + 1);
    let mut v_prev = BinaryVector::zeros(n);
    for word in u {
        let v = cfg.code.encode(word)?;
        let layer = cfg.r.vec_mul(&v_prev)?;
        frames.push(v.xor(&layer)?);
        v_prev = v;
    }
    frames.push(cfg.r.vec_mul(&v_prev)?);
    Ok(frames)
}

/// Streaming decoder enforcing the window-of-two contract: the decision for
/// sub-frame `t` is made as soon as block `t + 1` arrives, so it cannot
/// depend on anything later.
pub struct BmstDecoder<'a> {
    cfg: &'a BmstConfig,
    dcfg: DecoderConfig,
    /// The current sub-frame's observation with all earlier layers peeled
    /// off; `None` until the first block arrives.
    peeled: Option<RealVector>,
    decisions: Vec<BinaryVector>,
    log: FrameLog,
    frames_pushed: usize,
}

impl<'a> BmstDecoder<'a> {
    pub fn new(cfg: &'a BmstConfig, dcfg: DecoderConfig) -> Self {
        Self {
            cfg,
            dcfg,
            peeled: None,
            decisions: Vec::with_capacity(cfg.l()),
            log: FrameLog::default(),
            frames_pushed: 0,
        }
    }

    /// Feeds the next received block. Returns the freshly decided
    /// information word once a decision was made (every push after the
    /// first, up to `L + 1` pushes total).
    pub fn push_frame(&mut self, y: &[f64]) -> Result<Option<BinaryVector>> {
        let n = self.cfg.code.n();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if self.frames_pushed > self.cfg.l() {
            return Err(Error::FrameCountMismatch {
                expected: self.cfg.l() + 1,
                got: self.frames_pushed + 1,
            });
        }
        if self.peeled.is_none() {
            self.frames_pushed = 1;
            self.peeled = Some(y.to_vec());
            return Ok(None);
        }
        // a failed push (poisoned samples and the like) must not consume
        // decoder state, so peel only after the decision succeeds
        let z = self.peeled.as_deref().expect("checked above");
        let (decision, log) = self.decide_subframe(z, y)?;
        self.frames_pushed += 1;
        // Cancellation: peel the decided layer off the block just received,
        // turning it into a clean observation of the next basic codeword.
        let layer = self.cfg.r.vec_mul(&decision)?;
        let peeled: RealVector = y
            .iter()
            .zip(layer.as_slice())
            .map(|(&yi, &li)| yi * bpsk_symbol(li))
            .collect();
        self.peeled = Some(peeled);
        let word = log.info_word.clone();
        self.decisions.push(log.info_word.clone());
        self.log.subframes.push(log);
        Ok(Some(word))
    }

    /// One pass of the list-and-check loop: draw candidates while the best
    /// metric stays at or below the threshold and the cap allows, keep the
    /// argmax (later ties replace earlier ones), deliver it either way.
    fn decide_subframe(&self, z: &[f64], y_next: &[f64]) -> Result<(BinaryVector, SubframeLog)> {
        let code = &self.cfg.code;
        let mut session = SlvaSession::new(z, code, self.dcfg.l_max)?;
        let mut m_max = f64::NEG_INFINITY;
        let mut best: Option<crate::slva::Candidate> = None;
        let mut drawn = 0usize;
        while m_max <= self.dcfg.threshold && session.emitted_count() < self.dcfg.l_max {
            let cand = match session.next_candidate() {
                Ok(c) => c,
                // small codes can run out of codewords before the cap
                Err(Error::ListExhausted(_)) => break,
                Err(e) => return Err(e),
            };
            drawn += 1;
            let m = soft_metric(&cand, z, y_next, &self.cfg.r, code, &self.dcfg.model)?;
            if best.is_none() || m.value >= m_max {
                m_max = m.value;
                best = Some(cand);
            }
        }
        let best = best.expect("the loop always draws at least one candidate");
        let log = SubframeLog {
            list_size: drawn,
            m_max,
            passed_threshold: m_max > self.dcfg.threshold,
            info_word: best.info_word,
        };
        Ok((best.codeword, log))
    }

    pub fn decisions(&self) -> &[BinaryVector] {
        &self.decisions
    }

    /// Consumes the decoder after exactly `L + 1` blocks were pushed.
    pub fn finish(self) -> Result<(Vec<BinaryVector>, FrameLog)> {
        if self.frames_pushed != self.cfg.l() + 1 {
            return Err(Error::FrameCountMismatch {
                expected: self.cfg.l() + 1,
                got: self.frames_pushed,
            });
        }
        Ok((self.decisions, self.log))
    }
}

/// Whole-frame decoding: pushes all `L + 1` blocks through a streaming
/// decoder and returns the `L` decisions with their trace.
pub fn bmst_decode(
    cfg: &BmstConfig,
    dcfg: DecoderConfig,
    y: &[RealVector],
) -> Result<(Vec<BinaryVector>, FrameLog)> {
    if y.len() != cfg.l() + 1 {
        return Err(Error::FrameCountMismatch {
            expected: cfg.l() + 1,
            got: y.len(),
        });
    }
    let mut decoder = BmstDecoder::new(cfg, dcfg);
    for block in y {
        decoder.push_frame(block)?;
    }
    decoder.finish()
}
