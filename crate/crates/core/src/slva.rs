//! Viterbi and serial list Viterbi decoding over the tail-biting trellis.
//!
//! Tail-biting is handled exactly: one constrained subtrellis per start
//! state (start state = end state), a backward Viterbi pass on each, and a
//! serial best-first enumeration of closed paths merged across subtrellises
//! by a single priority queue. The first candidate is therefore the exact
//! maximum-likelihood codeword, and successive candidates come out in
//! non-increasing likelihood order.
//!
//! Path metric: the correlation between the received samples and the BPSK
//! image of the codeword. For a fixed received block this is an increasing
//! affine function of the log-likelihood (and of the negative squared
//! Euclidean distance), so ordering by correlation is ordering by
//! likelihood, and the metric is directly comparable across subtrellises.
//!
//! Tie-breaking: among equal-metric paths the lexicographically smallest
//! information word wins. The backward pass prefers input bit 0 on ties,
//! which realizes the same rule within a subtrellis.

use std::collections::{BinaryHeap, HashSet};

use crate::gf2::BinaryVector;
use crate::tbcc::TbccCode;
use crate::{Error, Result};

/// One decoded codeword, in list order.
#[derive(Clone, Debug)]
pub struct Candidate {
    pub codeword: BinaryVector,
    pub info_word: BinaryVector,
    /// Log-likelihood of the received block given this codeword, up to an
    /// affine map shared by every candidate for the same block: this is the
    /// negative squared Euclidean distance between the received samples and
    /// the codeword's BPSK image.
    pub log_likelihood: f64,
    /// Position in the emitted list, starting at 1.
    pub rank: usize,
}

/// Backward Viterbi tables for one start-state-constrained subtrellis.
///
/// `beta[t * n_states + s]` is the best correlation of any path from state
/// `s` at stage `t` to the subtrellis's anchor state at stage `k`
/// (`f64::NEG_INFINITY` where no such path exists), and `opt_bit` the input
/// bit achieving it (0 preferred on ties).
struct Subtrellis {
    beta: Vec<f64>,
    opt_bit: Vec<u8>,
}

impl Subtrellis {
    fn build(code: &TbccCode, y: &[f64], anchor: usize) -> Self {
        let t = code.trellis();
        let k = code.k();
        let ns = t.n_states();
        let mut beta = vec![f64::NEG_INFINITY; (k + 1) * ns];
        let mut opt_bit = vec![0u8; k * ns];
        beta[k * ns + anchor] = 0.0;
        for stage in (0..k).rev() {
            let y0 = y[2 * stage];
            let y1 = y[2 * stage + 1];
            for s in 0..ns {
                let m0 = t.branch_correlation(s, 0, y0, y1) + beta[(stage + 1) * ns + t.next_state(s, 0)];
                let m1 = t.branch_correlation(s, 1, y0, y1) + beta[(stage + 1) * ns + t.next_state(s, 1)];
                // ties go to bit 0, keeping completions lexicographically
                // smallest among the optimal ones
                if m1 > m0 {
                    beta[stage * ns + s] = m1;
                    opt_bit[stage * ns + s] = 1;
                } else {
                    beta[stage * ns + s] = m0;
                }
            }
        }
        Self { beta, opt_bit }
    }

    #[inline]
    fn beta(&self, stage: usize, state: usize, n_states: usize) -> f64 {
        self.beta[stage * n_states + state]
    }

    /// Follows `opt_bit` from `(stage, state)` to the end, appending the
    /// chosen input bits to `info`.
    fn extend_optimally(&self, code: &TbccCode, mut state: usize, stage: usize, info: &mut Vec<u8>) {
        let t = code.trellis();
        let ns = t.n_states();
        for st in stage..code.k() {
            let b = self.opt_bit[st * ns + state];
            info.push(b);
            state = t.next_state(state, b);
        }
    }
}

/// A fully specified closed path waiting in the enumeration queue.
///
/// `dev_floor` is the first stage at which children of this path may deviate
/// from it; the serial enumeration keeps every closed path reachable through
/// exactly one chain of deviations, so nothing is emitted twice.
struct PendingPath {
    corr: f64,
    info: Vec<u8>,
    dev_floor: usize,
}

impl PartialEq for PendingPath {
    fn eq(&self, other: &Self) -> bool {
        self.corr.total_cmp(&other.corr).is_eq() && self.info == other.info
    }
}

impl Eq for PendingPath {}

impl Ord for PendingPath {
    /// Larger correlation wins; on exact metric ties the lexicographically
    /// smaller information word is the greater queue element, so it pops
    /// first.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.corr
            .total_cmp(&other.corr)
            .then_with(|| other.info.cmp(&self.info))
    }
}

impl PartialOrd for PendingPath {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Serial list Viterbi decoding of one received block.
///
/// A session owns its queue and caches; create one per block, draw
/// candidates with [`SlvaSession::next_candidate`] until satisfied. Distinct
/// sessions are independent.
pub struct SlvaSession<'a> {
    code: &'a TbccCode,
    y: Vec<f64>,
    l_max: usize,
    emitted_count: usize,
    /// `sum(y_i^2) + n`, the candidate-independent part of the squared
    /// Euclidean distance.
    metric_offset: f64,
    subtrellises: Vec<Subtrellis>,
    heap: BinaryHeap<PendingPath>,
    emitted_codewords: HashSet<BinaryVector>,
}

impl<'a> SlvaSession<'a> {
    pub fn new(y: &[f64], code: &'a TbccCode, l_max: usize) -> Result<Self> {
        check_received(y, code)?;
        if l_max == 0 {
            return Err(Error::InvalidConfig("list cap must be at least 1".into()));
        }
        let ns = code.trellis().n_states();
        let mut subtrellises = Vec::with_capacity(ns);
        let mut heap = BinaryHeap::new();
        for anchor in 0..ns {
            let sub = Subtrellis::build(code, y, anchor);
            let corr = sub.beta(0, anchor, ns);
            if corr.is_finite() {
                let mut info = Vec::with_capacity(code.k());
                sub.extend_optimally(code, anchor, 0, &mut info);
                heap.push(PendingPath {
                    corr,
                    info,
                    dev_floor: 0,
                });
            }
            subtrellises.push(sub);
        }
        let metric_offset = y.iter().map(|v| v * v).sum::<f64>() + code.n() as f64;
        Ok(Self {
            code,
            y: y.to_vec(),
            l_max,
            emitted_count: 0,
            metric_offset,
            subtrellises,
            heap,
            emitted_codewords: HashSet::new(),
        })
    }

    pub fn emitted_count(&self) -> usize {
        self.emitted_count
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// Emits the next-best codeword across all subtrellises.
    ///
    /// Errors once the cap is reached or the whole codebook has been
    /// emitted.
    pub fn next_candidate(&mut self) -> Result<Candidate> {
        if self.emitted_count >= self.l_max {
            return Err(Error::ListExhausted(format!(
                "list cap of {} reached",
                self.l_max
            )));
        }
        while let Some(path) = self.heap.pop() {
            self.expand(&path);
            let info_word = BinaryVector::from_bits(path.info.clone())?;
            let codeword = self.code.encode(&info_word)?;
            // Distinct subtrellises can in principle share a codeword when
            // the generators are degenerate; emit each codeword once.
            if !self.emitted_codewords.insert(codeword.clone()) {
                continue;
            }
            self.emitted_count += 1;
            return Ok(Candidate {
                codeword,
                info_word,
                log_likelihood: 2.0 * path.corr - self.metric_offset,
                rank: self.emitted_count,
            });
        }
        Err(Error::ListExhausted(
            "every codeword has already been emitted".into(),
        ))
    }

    /// Pushes all children of `path`: for each allowed stage, flip that
    /// input bit and complete optimally. Each child's metric is exact
    /// (prefix correlation + deviated branch + cached suffix optimum), so
    /// the queue always pops the true next-best path.
    fn expand(&mut self, path: &PendingPath) {
        let code = self.code;
        let t = code.trellis();
        let ns = t.n_states();
        let k = code.k();
        let anchor = Self::anchor_of(&path.info, code);
        let sub = &self.subtrellises[anchor];

        let mut state = anchor;
        let mut prefix_corr = 0.0;
        for stage in 0..k {
            let bit = path.info[stage];
            let y0 = self.y[2 * stage];
            let y1 = self.y[2 * stage + 1];
            if stage >= path.dev_floor {
                let flipped = 1 - bit;
                let next = t.next_state(state, flipped);
                let suffix = sub.beta(stage + 1, next, ns);
                if suffix.is_finite() {
                    let corr =
                        prefix_corr + t.branch_correlation(state, flipped, y0, y1) + suffix;
                    let mut info = Vec::with_capacity(k);
                    info.extend_from_slice(&path.info[..stage]);
                    info.push(flipped);
                    sub.extend_optimally(code, next, stage + 1, &mut info);
                    self.heap.push(PendingPath {
                        corr,
                        info,
                        dev_floor: stage + 1,
                    });
                }
            }
            prefix_corr += t.branch_correlation(state, bit, y0, y1);
            state = t.next_state(state, bit);
        }
    }

    /// The subtrellis a closed path belongs to: the state encoded by its
    /// last `m` information bits.
    fn anchor_of(info: &[u8], code: &TbccCode) -> usize {
        let m = code.memory();
        let k = code.k();
        let mut s = 0usize;
        for j in 1..=m {
            s |= (info[k - j] as usize) << (j - 1);
        }
        s
    }
}

/// Rejects blocks of the wrong length and non-finite samples; metric
/// comparisons assume finite branch correlations.
fn check_received(y: &[f64], code: &TbccCode) -> Result<()> {
    if y.len() != code.n() {
        return Err(Error::DimensionMismatch {
            expected: code.n(),
            got: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidDimension(
            "received samples must be finite".into(),
        ));
    }
    Ok(())
}

/// Exact maximum-likelihood decoding of a tail-biting codeword: the best
/// closed path over all start-state-constrained subtrellises, ties broken
/// toward the lexicographically smallest information word.
pub fn viterbi(y: &[f64], code: &TbccCode) -> Result<Candidate> {
    check_received(y, code)?;
    let ns = code.trellis().n_states();
    let mut best: Option<(f64, Vec<u8>)> = None;
    for anchor in 0..ns {
        let sub = Subtrellis::build(code, y, anchor);
        let corr = sub.beta(0, anchor, ns);
        if !corr.is_finite() {
            continue;
        }
        let better = match &best {
            None => true,
            Some((best_corr, best_info)) => {
                match corr.total_cmp(best_corr) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => {
                        // compare lazily only on exact ties
                        let mut info = Vec::with_capacity(code.k());
                        sub.extend_optimally(code, anchor, 0, &mut info);
                        info < *best_info
                    }
                }
            }
        };
        if better {
            let mut info = Vec::with_capacity(code.k());
            sub.extend_optimally(code, anchor, 0, &mut info);
            best = Some((corr, info));
        }
    }
    let (corr, info) = best.expect("a tail-biting trellis always has closed paths");
    let info_word = BinaryVector::from_bits(info)?;
    let codeword = code.encode(&info_word)?;
    let metric_offset = y.iter().map(|v| v * v).sum::<f64>() + code.n() as f64;
    Ok(Candidate {
        codeword,
        info_word,
        log_likelihood: 2.0 * corr - metric_offset,
        rank: 1,
    })
}
