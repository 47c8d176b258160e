//! Off-line learning of the acceptance threshold.
//!
//! The decoder's check needs one scalar per operating point: a threshold
//! separating the soft metrics of correct candidates from erroneous ones.
//! Both populations are observable off-line by running the list decoder on
//! self-generated data, labeling each candidate with genie knowledge of the
//! transmitted word. The threshold is then a pure function of the labeled
//! sample set under an explicit, recorded policy, and the learned values are
//! stored in a small CSV table keyed by `(snr_db, k, l_max)`.
//!
//! The quantile policy works on the acceptance statistic rather than the
//! pooled candidate scores: one decoding attempt falsely accepts when the
//! *best* erroneous candidate of its list clears the threshold, so the
//! false-acceptance rate is governed by the distribution of per-trial
//! erroneous maxima. Pooling instead would let the many low-scoring deep
//! candidates of each list drag the quantile far below the region where
//! acceptance decisions are actually made.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::bmst::BmstConfig;
use crate::channel::ChannelModel;
use crate::edf::soft_metric;
use crate::gf2::BinaryVector;
use crate::slva::SlvaSession;
use crate::{Error, Result};

/// Genie-assigned label of one scored candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleLabel {
    Correct,
    Erroneous,
}

/// One scored candidate from the sampling runs.
#[derive(Clone, Copy, Debug)]
pub struct MetricSample {
    pub m_value: f64,
    pub label: SampleLabel,
    pub snr_db: f64,
    /// The candidate's list rank when it was scored.
    pub rank: usize,
}

/// How a threshold is distilled from labeled samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdPolicy {
    /// The `alpha`-quantile (nearest rank) of the erroneous acceptance
    /// statistic: the per-trial maximum of erroneous-labeled metric values.
    /// The decoder accepts a sub-frame as soon as its running best metric
    /// clears the threshold, so a false acceptance is driven by the largest
    /// erroneous metric a list presents, not by any single candidate. At
    /// level `alpha`, roughly that fraction of trials would present no
    /// erroneous candidate above the threshold.
    Quantile(f64),
    /// Halfway between the largest erroneous and the smallest correct metric
    /// value; lands strictly between the populations whenever they separate.
    Midpoint,
}

impl fmt::Display for ThresholdPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdPolicy::Quantile(alpha) => write!(f, "quantile:{}", alpha),
            ThresholdPolicy::Midpoint => write!(f, "midpoint"),
        }
    }
}

impl FromStr for ThresholdPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "midpoint" {
            return Ok(ThresholdPolicy::Midpoint);
        }
        if let Some(alpha) = s.strip_prefix("quantile:") {
            let alpha: f64 = alpha
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad quantile level {:?}", alpha)))?;
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::InvalidConfig(format!(
                    "quantile level {} outside [0, 1]",
                    alpha
                )));
            }
            return Ok(ThresholdPolicy::Quantile(alpha));
        }
        Err(Error::InvalidConfig(format!(
            "unknown threshold policy {:?} (expected \"midpoint\" or \"quantile:<level>\")",
            s
        )))
    }
}

/// Runs labeled sampling trials at the given channel.
///
/// Each trial transmits two chained sub-frames of fresh random data, list
/// decodes the first one up to `l_max` candidates, scores every candidate
/// against the second block, and labels it by comparison with the
/// transmitted word. Only the first two sub-frames of a frame matter to the
/// metric, so trials are two sub-frames long regardless of `cfg.l()`.
pub fn collect_samples<R: Rng + ?Sized>(
    cfg: &BmstConfig,
    model: &ChannelModel,
    trials: usize,
    l_max: usize,
    rng: &mut R,
) -> Result<Vec<MetricSample>> {
    if trials == 0 {
        return Err(Error::InvalidConfig(
            "sampling needs at least one trial".into(),
        ));
    }
    let code = cfg.code();
    let k = code.k();
    let r = cfg.transform();
    let mut samples = Vec::with_capacity(trials * l_max);
    for _ in 0..trials {
        let u0 = BinaryVector::random(k, rng);
        let u1 = BinaryVector::random(k, rng);
        let v0 = code.encode(&u0)?;
        let v1 = code.encode(&u1)?;
        let c1 = v1.xor(&r.vec_mul(&v0)?)?;
        let y0 = model.transmit(&v0, rng);
        let y1 = model.transmit(&c1, rng);
        let mut session = SlvaSession::new(&y0, code, l_max)?;
        loop {
            let cand = match session.next_candidate() {
                Ok(c) => c,
                Err(Error::ListExhausted(_)) => break,
                Err(e) => return Err(e),
            };
            let m = soft_metric(&cand, &y0, &y1, r, code, model)?;
            samples.push(MetricSample {
                m_value: m.value,
                label: if cand.info_word == u0 {
                    SampleLabel::Correct
                } else {
                    SampleLabel::Erroneous
                },
                snr_db: model.snr_db(),
                rank: cand.rank,
            });
        }
    }
    Ok(samples)
}

/// Per-trial maxima of the erroneous-labeled metric values.
///
/// Sample vectors list trials back to back and every trial opens at rank 1,
/// so a rank reset delimits trials. Trials whose list held no erroneous
/// candidate contribute nothing.
fn erroneous_trial_maxima(samples: &[MetricSample]) -> Vec<f64> {
    let mut maxima = Vec::new();
    let mut current: Option<f64> = None;
    let mut open = false;
    for s in samples {
        if s.rank == 1 {
            if open {
                maxima.extend(current.take());
            }
            open = true;
            current = None;
        }
        if s.label == SampleLabel::Erroneous {
            current = Some(current.map_or(s.m_value, |c| c.max(s.m_value)));
        }
    }
    if open {
        maxima.extend(current.take());
    }
    maxima
}

/// Distills a threshold from labeled samples under the given policy.
///
/// Both labels must be present; a sample set that never saw an error (or
/// never a success) pins down nothing.
pub fn choose_threshold(samples: &[MetricSample], policy: ThresholdPolicy) -> Result<f64> {
    let any_erroneous = samples.iter().any(|s| s.label == SampleLabel::Erroneous);
    let correct_min = samples
        .iter()
        .filter(|s| s.label == SampleLabel::Correct)
        .map(|s| s.m_value)
        .fold(f64::INFINITY, f64::min);
    if !any_erroneous || correct_min.is_infinite() {
        return Err(Error::InsufficientSamples(
            "need samples of both labels to place a threshold".into(),
        ));
    }
    match policy {
        ThresholdPolicy::Quantile(alpha) => {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::InvalidConfig(format!(
                    "quantile level {} outside [0, 1]",
                    alpha
                )));
            }
            let mut maxima = erroneous_trial_maxima(samples);
            maxima.sort_by(f64::total_cmp);
            // nearest-rank quantile: smallest value with at least an alpha
            // fraction of the per-trial maxima at or below it
            let n = maxima.len();
            let rank = ((alpha * n as f64).ceil() as usize).clamp(1, n);
            Ok(maxima[rank - 1])
        }
        ThresholdPolicy::Midpoint => {
            let err_max = samples
                .iter()
                .filter(|s| s.label == SampleLabel::Erroneous)
                .map(|s| s.m_value)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok((err_max + correct_min) / 2.0)
        }
    }
}

/// A learned threshold for one operating point.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdEntry {
    pub snr_db: f64,
    pub k: usize,
    pub l_max: usize,
    pub threshold: f64,
    pub policy: ThresholdPolicy,
}

/// Learned thresholds keyed by `(snr_db, k, l_max)`.
///
/// Lookups are exact-match on all three keys (bit-exact on `snr_db`); the
/// table is a store of learned operating points, not an interpolator.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ThresholdTable {
    entries: Vec<ThresholdEntry>,
}

impl ThresholdTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces the entry with the given key.
    pub fn insert(&mut self, entry: ThresholdEntry) {
        if let Some(existing) = self
            .entries
            .iter_mut()
            .find(|e| e.snr_db == entry.snr_db && e.k == entry.k && e.l_max == entry.l_max)
        {
            *existing = entry;
        } else {
            self.entries.push(entry);
        }
    }

    pub fn lookup(&self, snr_db: f64, k: usize, l_max: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.snr_db == snr_db && e.k == k && e.l_max == l_max)
            .map(|e| e.threshold)
    }

    pub fn entries(&self) -> &[ThresholdEntry] {
        &self.entries
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("snr_db,k,l_max,threshold,policy\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.snr_db, e.k, e.l_max, e.threshold, e.policy
            ));
        }
        out
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        match lines.next() {
            Some("snr_db,k,l_max,threshold,policy") => {}
            other => {
                return Err(Error::InvalidConfig(format!(
                    "bad threshold table header: {:?}",
                    other
                )))
            }
        }
        let mut table = Self::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::InvalidConfig(format!(
                    "threshold table row {} has {} fields, expected 5",
                    i + 2,
                    fields.len()
                )));
            }
            let parse_err =
                |what: &str| Error::InvalidConfig(format!("row {}: bad {}", i + 2, what));
            table.insert(ThresholdEntry {
                snr_db: fields[0].parse().map_err(|_| parse_err("snr_db"))?,
                k: fields[1].parse().map_err(|_| parse_err("k"))?,
                l_max: fields[2].parse().map_err(|_| parse_err("l_max"))?,
                threshold: fields[3].parse().map_err(|_| parse_err("threshold"))?,
                policy: fields[4].parse()?,
            });
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tbcc::TbccCode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample(m: f64, label: SampleLabel) -> MetricSample {
        MetricSample {
            m_value: m,
            label,
            snr_db: 3.0,
            rank: 1,
        }
    }

    fn synthetic() -> Vec<MetricSample> {
        let mut s: Vec<MetricSample> = [0.1, 0.2, 0.3, 0.4, 0.5]
            .iter()
            .map(|&m| sample(m, SampleLabel::Erroneous))
            .collect();
        s.push(sample(1.5, SampleLabel::Correct));
        s.push(sample(2.0, SampleLabel::Correct));
        s
    }

    #[test]
    fn midpoint_lands_between_separated_populations() {
        let t = choose_threshold(&synthetic(), ThresholdPolicy::Midpoint).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
        assert!(t > 0.5 && t < 1.5);
    }

    #[test]
    fn quantile_is_nearest_rank_and_monotone_in_alpha() {
        let s = synthetic();
        assert_eq!(
            choose_threshold(&s, ThresholdPolicy::Quantile(1.0)).unwrap(),
            0.5
        );
        assert_eq!(
            choose_threshold(&s, ThresholdPolicy::Quantile(0.6)).unwrap(),
            0.3
        );
        assert_eq!(
            choose_threshold(&s, ThresholdPolicy::Quantile(0.0)).unwrap(),
            0.1
        );
        let mut prev = f64::NEG_INFINITY;
        for step in 0..=20 {
            let alpha = step as f64 / 20.0;
            let t = choose_threshold(&s, ThresholdPolicy::Quantile(alpha)).unwrap();
            assert!(t >= prev, "alpha {}: {} after {}", alpha, t, prev);
            prev = t;
        }
    }

    #[test]
    fn quantile_uses_per_trial_maxima_not_pooled_values() {
        fn at_rank(m: f64, label: SampleLabel, rank: usize) -> MetricSample {
            MetricSample {
                m_value: m,
                label,
                snr_db: 3.0,
                rank,
            }
        }
        // three trials of four candidates each; erroneous maxima are
        // 0.9, 0.7, and 0.8, while the pooled erroneous median would be 0.3
        let samples = vec![
            at_rank(1.5, SampleLabel::Correct, 1),
            at_rank(0.9, SampleLabel::Erroneous, 2),
            at_rank(0.2, SampleLabel::Erroneous, 3),
            at_rank(0.1, SampleLabel::Erroneous, 4),
            at_rank(1.4, SampleLabel::Correct, 1),
            at_rank(0.7, SampleLabel::Erroneous, 2),
            at_rank(0.3, SampleLabel::Erroneous, 3),
            at_rank(0.2, SampleLabel::Erroneous, 4),
            at_rank(1.6, SampleLabel::Correct, 1),
            at_rank(0.8, SampleLabel::Erroneous, 2),
            at_rank(0.4, SampleLabel::Erroneous, 3),
            at_rank(0.1, SampleLabel::Erroneous, 4),
        ];
        // maxima sorted: [0.7, 0.8, 0.9]
        assert_eq!(
            choose_threshold(&samples, ThresholdPolicy::Quantile(0.5)).unwrap(),
            0.8
        );
        assert_eq!(
            choose_threshold(&samples, ThresholdPolicy::Quantile(1.0)).unwrap(),
            0.9
        );
        // a trial with no erroneous candidates contributes no maximum
        let mut with_clean_trial = samples.clone();
        with_clean_trial.push(at_rank(1.7, SampleLabel::Correct, 1));
        assert_eq!(
            choose_threshold(&with_clean_trial, ThresholdPolicy::Quantile(0.5)).unwrap(),
            0.8
        );
    }

    #[test]
    fn single_label_sets_are_rejected() {
        let errs: Vec<MetricSample> = (0..5)
            .map(|i| sample(i as f64, SampleLabel::Erroneous))
            .collect();
        assert!(choose_threshold(&errs, ThresholdPolicy::Midpoint).is_err());
        let oks: Vec<MetricSample> = (0..5)
            .map(|i| sample(i as f64, SampleLabel::Correct))
            .collect();
        assert!(choose_threshold(&oks, ThresholdPolicy::Quantile(0.9)).is_err());
        assert!(choose_threshold(&[], ThresholdPolicy::Midpoint).is_err());
    }

    #[test]
    fn near_noiseless_trials_label_rank_one_correct() {
        let cfg = BmstConfig::new(TbccCode::new(8).unwrap(), 2, 3).unwrap();
        let model = ChannelModel::from_snr_db(60.0);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let samples = collect_samples(&cfg, &model, 30, 4, &mut rng).unwrap();
        assert_eq!(samples.len(), 30 * 4);
        for s in samples.iter().filter(|s| s.rank == 1) {
            assert_eq!(s.label, SampleLabel::Correct);
        }
    }

    #[test]
    fn correct_samples_score_higher_on_average() {
        let cfg = BmstConfig::new(TbccCode::new(8).unwrap(), 2, 3).unwrap();
        let model = ChannelModel::from_snr_db(3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples = collect_samples(&cfg, &model, 200, 8, &mut rng).unwrap();
        let mean = |label: SampleLabel| {
            let vals: Vec<f64> = samples
                .iter()
                .filter(|s| s.label == label)
                .map(|s| s.m_value)
                .collect();
            assert!(!vals.is_empty());
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        assert!(mean(SampleLabel::Correct) > mean(SampleLabel::Erroneous));
    }

    #[test]
    fn policy_strings_round_trip() {
        for policy in [
            ThresholdPolicy::Midpoint,
            ThresholdPolicy::Quantile(0.99),
            ThresholdPolicy::Quantile(0.5),
        ] {
            let parsed: ThresholdPolicy = policy.to_string().parse().unwrap();
            assert_eq!(parsed, policy);
        }
        assert!("quantile:1.5".parse::<ThresholdPolicy>().is_err());
        assert!("nonsense".parse::<ThresholdPolicy>().is_err());
    }

    #[test]
    fn table_round_trips_through_csv() {
        let mut table = ThresholdTable::new();
        table.insert(ThresholdEntry {
            snr_db: 3.0,
            k: 32,
            l_max: 64,
            threshold: 1.2,
            policy: ThresholdPolicy::Quantile(0.99),
        });
        table.insert(ThresholdEntry {
            snr_db: 4.0,
            k: 32,
            l_max: 64,
            threshold: 1.15,
            policy: ThresholdPolicy::Midpoint,
        });
        let csv = table.to_csv_string();
        let parsed = ThresholdTable::from_csv_str(&csv).unwrap();
        assert_eq!(parsed, table);
        assert_eq!(parsed.to_csv_string(), csv);
        assert_eq!(parsed.lookup(3.0, 32, 64), Some(1.2));
        assert_eq!(parsed.lookup(3.0, 32, 32), None);
        assert_eq!(parsed.lookup(3.5, 32, 64), None);

        // replacement keeps one entry per key
        let mut table2 = table.clone();
        table2.insert(ThresholdEntry {
            snr_db: 3.0,
            k: 32,
            l_max: 64,
            threshold: 1.25,
            policy: ThresholdPolicy::Midpoint,
        });
        assert_eq!(table2.entries().len(), 2);
        assert_eq!(table2.lookup(3.0, 32, 64), Some(1.25));

        // malformed inputs
        assert!(ThresholdTable::from_csv_str("wrong,header\n").is_err());
        assert!(ThresholdTable::from_csv_str(
            "snr_db,k,l_max,threshold,policy\n3.0,32,64,abc,midpoint\n"
        )
        .is_err());
    }
}
