//! Monte Carlo simulation harness.
//!
//! An experiment sweeps a list of SNR points with one threshold per point,
//! either supplied up front or learned on the fly from labeled metric
//! samples. Every frame draws its randomness from its own counter-mode
//! stream of one master-seeded generator, so results are byte-identical
//! across reruns and across worker counts; frames within a chunk run in
//! parallel and are folded back in index order.
//!
//! A point may stop early once enough sub-frame errors have accumulated
//! (`error_cap`, checked at chunk boundaries so the abort point is itself
//! deterministic). The CSV output then simply shows fewer frames.

use std::io::{self, Write};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::{error_rates, ErrorCounters, ErrorRates};
use crate::bmst::{bmst_decode, bmst_encode, BmstConfig, DecoderConfig};
use crate::channel::{ChannelModel, RealVector};
use crate::gf2::BinaryVector;
use crate::learn::{choose_threshold, collect_samples, ThresholdPolicy};
use crate::tbcc::TbccCode;
use crate::{Error, Result};

/// Frames simulated between abort checks; also the parallel batch size.
const CHUNK: u64 = 128;

/// Stream slot reserved for threshold learning; frame indices stay below it.
const LEARN_SLOT: u64 = u32::MAX as u64;

/// Everything a sweep needs. Fields are public so front ends can assemble
/// one from flags and config files.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    /// Information bits per sub-frame.
    pub k: usize,
    /// Encoder memory of the basic code.
    pub memory: usize,
    /// Generator polynomials, coefficient of `D^j` in bit `j`.
    pub generators: [u32; 2],
    /// Data sub-frames per frame.
    pub l: usize,
    /// SNR points to sweep, in dB.
    pub snr_db: Vec<f64>,
    /// One threshold per SNR point; leave empty to learn them instead.
    pub thresholds: Vec<f64>,
    /// List size cap per sub-frame.
    pub l_max: usize,
    /// Frames per point (an error cap may cut a point short).
    pub frames: u64,
    /// Seeds the transform and every per-frame noise stream.
    pub master_seed: u64,
    /// How to turn labeled samples into a threshold when learning.
    pub policy: ThresholdPolicy,
    /// Trials per point when learning thresholds.
    pub learn_trials: usize,
    /// Stop a point after this many sub-frame errors; 0 disables.
    pub error_cap: u64,
}

impl Default for ExperimentConfig {
    /// The headline setup: the (2, 1, 4) code, `k = 32`, `L = 49`.
    fn default() -> Self {
        Self {
            k: 32,
            memory: 4,
            generators: [0b11101, 0b10011],
            l: 49,
            snr_db: Vec::new(),
            thresholds: Vec::new(),
            l_max: 64,
            frames: 1000,
            master_seed: 1,
            policy: ThresholdPolicy::Quantile(0.99),
            learn_trials: 2000,
            error_cap: 100,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() {
            return Err(Error::InvalidConfig("no SNR points to sweep".into()));
        }
        if !self.thresholds.is_empty() && self.thresholds.len() != self.snr_db.len() {
            return Err(Error::InvalidConfig(format!(
                "{} thresholds for {} SNR points",
                self.thresholds.len(),
                self.snr_db.len()
            )));
        }
        if self.thresholds.is_empty() && self.learn_trials == 0 {
            return Err(Error::InvalidConfig(
                "learning thresholds needs at least one trial".into(),
            ));
        }
        if self.frames == 0 {
            return Err(Error::InvalidConfig("no frames to simulate".into()));
        }
        if self.frames >= LEARN_SLOT {
            return Err(Error::InvalidConfig(format!(
                "at most {} frames per point",
                LEARN_SLOT - 1
            )));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("SNR points must be finite".into()));
        }
        Ok(())
    }

    pub fn code(&self) -> Result<TbccCode> {
        TbccCode::with_generators(self.k, self.memory, self.generators)
    }
}

/// Outcome of one SNR point.
#[derive(Clone, Debug)]
pub struct PointResult {
    pub snr_db: f64,
    /// The threshold actually used, learned or supplied.
    pub threshold: f64,
    pub counters: ErrorCounters,
    pub rates: ErrorRates,
    /// Candidates drawn across all sub-frame decisions.
    pub total_list_size: u64,
    pub wall_clock: Duration,
    pub seed: u64,
}

impl PointResult {
    pub fn frames_run(&self) -> u64 {
        self.counters.frames_sent
    }

    /// Mean candidates per sub-frame decision, in `[1, l_max]`.
    pub fn avg_list_size(&self) -> f64 {
        self.total_list_size as f64 / self.counters.subframes_sent as f64
    }
}

/// Outcome of a whole sweep.
#[derive(Clone, Debug, Default)]
pub struct SimResult {
    pub points: Vec<PointResult>,
    pub master_seed: u64,
}

/// One generator per (point, slot) pair: counter-mode streams of a single
/// master-seeded cipher never overlap.
fn stream_rng(master_seed: u64, point: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((point << 32) | slot);
    rng
}

struct FrameOutcome {
    first_error: Option<usize>,
    wrong_subframes: u64,
    list_total: u64,
}

/// Transmits and decodes one frame on its own noise stream.
fn simulate_frame(
    bmst: &BmstConfig,
    dcfg: DecoderConfig,
    master_seed: u64,
    point: u64,
    frame: u64,
) -> Result<FrameOutcome> {
    let mut rng = stream_rng(master_seed, point, frame);
    let k = bmst.code().k();
    let words: Vec<BinaryVector> = (0..bmst.l())
        .map(|_| BinaryVector::random(k, &mut rng))
        .collect();
    let coded = bmst_encode(bmst, &words)?;
    let received: Vec<RealVector> = coded
        .iter()
        .map(|c| dcfg.model.transmit(c, &mut rng))
        .collect();
    let (decisions, log) = bmst_decode(bmst, dcfg, &received)?;
    let mut first_error = None;
    let mut wrong = 0u64;
    for (t, (u, d)) in words.iter().zip(&decisions).enumerate() {
        if u != d {
            wrong += 1;
            if first_error.is_none() {
                first_error = Some(t);
            }
        }
    }
    Ok(FrameOutcome {
        first_error,
        wrong_subframes: wrong,
        list_total: log.total_list_size() as u64,
    })
}

/// Learns the threshold for one sweep point on the point's reserved
/// sampling stream, leaving every measurement stream untouched.
fn learn_point_threshold(
    bmst: &BmstConfig,
    cfg: &ExperimentConfig,
    point: u64,
    model: &ChannelModel,
) -> Result<f64> {
    let mut rng = stream_rng(cfg.master_seed, point, LEARN_SLOT);
    let samples = collect_samples(bmst, model, cfg.learn_trials, cfg.l_max, &mut rng)?;
    choose_threshold(&samples, cfg.policy)
}

/// Learns the threshold the sweep would use at `snr_db[point]`.
///
/// Running this for every point and passing the results back in as the
/// `thresholds` list reproduces the auto-learned sweep exactly, because
/// both paths draw from the same per-point sampling stream.
pub fn learn_threshold(cfg: &ExperimentConfig, point: usize) -> Result<f64> {
    cfg.validate()?;
    if point >= cfg.snr_db.len() {
        return Err(Error::InvalidConfig(format!(
            "point index {} is outside the {}-point sweep",
            point,
            cfg.snr_db.len()
        )));
    }
    let bmst = BmstConfig::new(cfg.code()?, cfg.l, cfg.master_seed)?;
    let model = ChannelModel::from_snr_db(cfg.snr_db[point]);
    learn_point_threshold(&bmst, cfg, point as u64, &model)
}

/// Runs the sweep and returns per-point counters, rates, and timings.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<SimResult> {
    cfg.validate()?;
    let code = cfg.code()?;
    let bmst = BmstConfig::new(code, cfg.l, cfg.master_seed)?;
    let mut points = Vec::with_capacity(cfg.snr_db.len());
    for (idx, &snr) in cfg.snr_db.iter().enumerate() {
        let point = idx as u64;
        let model = ChannelModel::from_snr_db(snr);
        let threshold = if cfg.thresholds.is_empty() {
            learn_point_threshold(&bmst, cfg, point, &model)?
        } else {
            cfg.thresholds[idx]
        };
        let dcfg = DecoderConfig::new(threshold, cfg.l_max, model)?;
        let start = Instant::now();
        let mut counters = ErrorCounters::new();
        let mut total_list = 0u64;
        let mut next_frame = 0u64;
        while next_frame < cfg.frames {
            if cfg.error_cap > 0 && counters.subframes_in_error >= cfg.error_cap {
                break;
            }
            let chunk_end = (next_frame + CHUNK).min(cfg.frames);
            let outcomes = (next_frame..chunk_end)
                .into_par_iter()
                .map(|f| simulate_frame(&bmst, dcfg, cfg.master_seed, point, f))
                .collect::<Result<Vec<_>>>()?;
            for o in &outcomes {
                counters.record_outcome(cfg.l, o.first_error, o.wrong_subframes);
                total_list += o.list_total;
            }
            next_frame = chunk_end;
        }
        let rates = error_rates(&counters)?;
        points.push(PointResult {
            snr_db: snr,
            threshold,
            counters,
            rates,
            total_list_size: total_list,
            wall_clock: start.elapsed(),
            seed: cfg.master_seed,
        });
    }
    Ok(SimResult {
        points,
        master_seed: cfg.master_seed,
    })
}

/// Writes one sweep as CSV. Column names are part of the output contract;
/// `fer` is the sub-frame error fraction, `ferr_frame` the whole-frame rate.
pub fn emit_csv(result: &SimResult, out: &mut impl Write) -> io::Result<()> {
    writeln!(
        out,
        "snr_db,threshold,frames,subframes,subframe_errors,fer,subfer,ferr_frame,avg_list_size,seed"
    )?;
    for p in &result.points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            p.snr_db,
            p.threshold,
            p.counters.frames_sent,
            p.counters.subframes_sent,
            p.counters.subframes_in_error,
            p.rates.fer_subframes,
            p.rates.subfer,
            p.rates.fer,
            p.avg_list_size(),
            p.seed,
        )?;
    }
    Ok(())
}

/// [`emit_csv`] into a fresh string.
pub fn csv_string(result: &SimResult) -> String {
    let mut buf = Vec::new();
    emit_csv(result, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}
