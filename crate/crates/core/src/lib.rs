//! Block Markov superposition transmission of a tail-biting convolutional
//! code (BMST-TBCC).
//!
//! The transmitter encodes each length-`k` information word with a short
//! tail-biting convolutional code and superimposes (over GF(2)) a random
//! linear transform of the previous codeword before transmission, so the
//! stream carries a one-block memory. The receiver runs a sliding-window
//! successive-cancellation decoder: a serial list Viterbi algorithm proposes
//! candidate codewords for the current sub-frame, and each candidate is
//! checked against the *next* sub-frame through an empirical divergence
//! metric instead of a CRC. The acceptance threshold is learned off-line
//! from labeled metric samples.
//!
//! Module map:
//! - [`gf2`]: binary vectors/matrices and the seeded random transform
//! - [`tbcc`]: the basic tail-biting convolutional code and its trellis
//! - [`channel`]: BPSK over AWGN, densities, mutual-information reference
//! - [`slva`]: Viterbi and serial list Viterbi decoding on the tail-biting
//!   trellis
//! - [`edf`]: empirical divergence function and the candidate soft metric
//! - [`bmst`]: stream encoder and the successive-cancellation decoder
//! - [`learn`]: off-line threshold learning from labeled metric samples
//! - [`analysis`]: error-rate counters, weight enumerators, union bound
//! - [`sim`]: deterministic Monte Carlo experiment runner and CSV output

pub mod analysis;
pub mod bmst;
pub mod channel;
pub mod edf;
pub mod gf2;
pub mod learn;
pub mod sim;
pub mod slva;
pub mod tbcc;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix dimension was zero where a positive size is required.
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    /// Two operands that must agree in length did not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// A code parameter is outside the supported range.
    #[error("invalid code parameters: {0}")]
    InvalidCode(String),
    /// Exhaustive codebook enumeration was requested for a code too large to
    /// enumerate.
    #[error("enumeration too large: k = {k} exceeds the limit of {limit}")]
    EnumerationTooLarge { k: usize, limit: usize },
    /// The candidate list was exhausted (all codewords emitted) or the list
    /// cap was reached.
    #[error("candidate list exhausted: {0}")]
    ListExhausted(String),
    /// Numerical quadrature failed to converge to the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),
    /// A frame sequence had the wrong number of frames.
    #[error("frame count mismatch: expected {expected}, got {got}")]
    FrameCountMismatch { expected: usize, got: usize },
    /// Threshold learning was given samples that do not cover both labels.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    /// A configuration value failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// Empty counters or zero denominators when computing rates.
    #[error("empty counters: {0}")]
    EmptyCounters(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use analysis::{ErrorCounters, ErrorRates, WefPolynomial};
pub use bmst::{BmstConfig, BmstDecoder, DecoderConfig, FrameLog, SubframeLog};
pub use channel::{ChannelModel, RealVector, ReferenceStats};
pub use edf::{EdfValue, SoftMetric};
pub use gf2::{BinaryMatrix, BinaryVector};
pub use learn::{MetricSample, SampleLabel, ThresholdPolicy, ThresholdTable};
pub use sim::{ExperimentConfig, PointResult, SimResult};
pub use slva::{Candidate, SlvaSession};
pub use tbcc::{TbccCode, Trellis};
