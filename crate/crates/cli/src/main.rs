//! Command line front end for the transmission scheme.
//!
//! Six subcommands cover the whole workflow: `encode` and `decode` move
//! single frames through the scheme as text, `simulate` runs Monte Carlo
//! sweeps and emits one CSV row per SNR point, `learn` distills acceptance
//! thresholds from labeled samples, `wef` prints weight enumerators, and
//! `mi` prints the analytic channel references.
//!
//! Frames of information or code bits travel as lines of '0' and '1'
//! characters, leftmost bit first; received values travel as lines of
//! comma-separated reals. Every subcommand accepts `--config <file>` with
//! the same key=value keys as its flags, and flags override the file.
//! The process exits 0 on success and nonzero on any configuration or IO
//! error.

mod config;

use std::fs;
use std::io::{self, Read as _, Write as _};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bmst_core::analysis::{basic_wef, ensemble_wef};
use bmst_core::bmst::{bmst_decode, bmst_encode};
use bmst_core::channel::ReferenceStats;
use bmst_core::learn::ThresholdEntry;
use bmst_core::sim::{csv_string, learn_threshold, run_experiment};
use bmst_core::{
    BinaryVector, BmstConfig, ChannelModel, DecoderConfig, ExperimentConfig, TbccCode,
    ThresholdPolicy, ThresholdTable,
};

use config::{parse_generators, parse_list, require, resolve, FileSettings};

/// Generators of the default code, leftmost coefficient first.
const DEFAULT_GENERATORS: &str = "10111,11001";

/// Block Markov superposition transmission of a tail-biting convolutional
/// code: encoding, decoding, Monte Carlo sweeps, threshold learning, and
/// analytic references.
#[derive(Parser)]
#[command(name = "bmst", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode frames of information words into code blocks.
    ///
    /// Reads l lines of k bits per frame and writes l + 1 lines of 2k bits
    /// per frame.
    Encode(EncodeArgs),
    /// Decode frames of received values back into information words.
    ///
    /// Reads l + 1 lines of 2k comma-separated reals per frame and writes
    /// l lines of k bits per frame.
    Decode(DecodeArgs),
    /// Sweep SNR points with Monte Carlo frames; one CSV row per point.
    Simulate(SimulateArgs),
    /// Learn acceptance thresholds and print them as a CSV table.
    Learn(LearnArgs),
    /// Print weight enumerators of the basic code and the mixed ensemble.
    Wef(WefArgs),
    /// Print mutual information and the mean random-word divergence.
    Mi(MiArgs),
}

/// Settings every code-touching subcommand shares.
#[derive(Args)]
struct CommonOpts {
    /// Key=value config file; flags override its settings.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Information bits per sub-frame.
    #[arg(long)]
    k: Option<usize>,
    /// Generator polynomials as binary strings, leftmost bit first.
    #[arg(long, value_name = "G1,G2")]
    generators: Option<String>,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Data sub-frames per frame.
    #[arg(long)]
    l: Option<usize>,
    /// Seed of the block-level transform.
    #[arg(long)]
    r_seed: Option<u64>,
    /// Input path; stdin when omitted or "-".
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Output path; stdout when omitted or "-".
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Data sub-frames per frame.
    #[arg(long)]
    l: Option<usize>,
    /// Seed of the block-level transform.
    #[arg(long)]
    r_seed: Option<u64>,
    /// Acceptance threshold for the soft metric.
    #[arg(long)]
    threshold: Option<f64>,
    /// List size cap per sub-frame.
    #[arg(long)]
    l_max: Option<usize>,
    /// Channel SNR in dB; sets the metric scaling.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Input path; stdin when omitted or "-".
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Output path; stdout when omitted or "-".
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Data sub-frames per frame.
    #[arg(long)]
    l: Option<usize>,
    /// SNR points to sweep, comma separated, in dB.
    #[arg(long, value_name = "LIST")]
    snr_db: Option<String>,
    /// One threshold per SNR point; learned when omitted.
    #[arg(long, value_name = "LIST")]
    thresholds: Option<String>,
    /// List size cap per sub-frame.
    #[arg(long)]
    l_max: Option<usize>,
    /// Frames per SNR point.
    #[arg(long)]
    frames: Option<u64>,
    /// Master seed; fixes every emitted number.
    #[arg(long)]
    seed: Option<u64>,
    /// Threshold policy: "quantile:<level>" or "midpoint".
    #[arg(long)]
    policy: Option<String>,
    /// Sampling trials per point when learning thresholds.
    #[arg(long)]
    learn_trials: Option<usize>,
    /// Stop a point after this many sub-frame errors; 0 disables.
    #[arg(long)]
    error_cap: Option<u64>,
    /// Output path; stdout when omitted or "-".
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct LearnArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// SNR points to learn thresholds for, comma separated, in dB.
    #[arg(long, value_name = "LIST")]
    snr_db: Option<String>,
    /// Labeled sampling trials per SNR point.
    #[arg(long)]
    trials: Option<usize>,
    /// Threshold policy: "quantile:<level>" or "midpoint".
    #[arg(long)]
    policy: Option<String>,
    /// List size cap per sub-frame.
    #[arg(long)]
    l_max: Option<usize>,
    /// Master seed; the same seed feeds the simulate subcommand.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when omitted or "-".
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct WefArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Output path; stdout when omitted or "-".
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MiArgs {
    /// Key=value config file; flags override its settings.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Channel SNR in dB.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Output path; stdout when omitted or "-".
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Encode(args) => run_encode(args),
        Command::Decode(args) => run_decode(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Learn(args) => run_learn(args),
        Command::Wef(args) => run_wef(args),
        Command::Mi(args) => run_mi(args),
    };
    if let Err(e) = outcome {
        eprintln!("error: {:#}", e);
        std::process::exit(1);
    }
}

/// Code parameters with the file and defaults folded in.
struct CodeParams {
    k: usize,
    memory: usize,
    generators: [u32; 2],
}

impl CodeParams {
    fn build(&self) -> Result<TbccCode> {
        Ok(TbccCode::with_generators(
            self.k,
            self.memory,
            self.generators,
        )?)
    }
}

fn resolve_code(common: &CommonOpts, file: &FileSettings, default_k: Option<usize>) -> Result<CodeParams> {
    let Some(k) = common.k.or(file.get("k")?).or(default_k) else {
        bail!("missing k: pass --k or set k in the config file");
    };
    let raw = resolve(
        common.generators.clone(),
        file.get("generators")?,
        DEFAULT_GENERATORS.to_string(),
    );
    let (memory, generators) = parse_generators(&raw)?;
    Ok(CodeParams {
        k,
        memory,
        generators,
    })
}

/// Reads the whole input: a file path, or stdin for "-" or no path.
fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))
        }
        _ => {
            let mut buf = String::new();
            io::stdin()
                .read_to_string(&mut buf)
                .context("cannot read stdin")?;
            Ok(buf)
        }
    }
}

/// Writes the whole output: a file path, or stdout for "-" or no path.
fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))
        }
        _ => io::stdout()
            .write_all(text.as_bytes())
            .context("cannot write stdout"),
    }
}

/// Parses nonempty lines of '0'/'1' characters, each exactly `len` bits.
fn parse_bit_lines(text: &str, len: usize) -> Result<Vec<BinaryVector>> {
    let mut words = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let word: BinaryVector = line
            .parse()
            .map_err(|e| anyhow!("input line {}: {}", idx + 1, e))?;
        if word.len() != len {
            bail!(
                "input line {}: expected {} bits, got {}",
                idx + 1,
                len,
                word.len()
            );
        }
        words.push(word);
    }
    Ok(words)
}

/// Parses nonempty lines of comma-separated reals, each exactly `len` long.
fn parse_real_lines(text: &str, len: usize) -> Result<Vec<Vec<f64>>> {
    let mut blocks = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let block: Vec<f64> =
            parse_list(line).with_context(|| format!("input line {}", idx + 1))?;
        if block.len() != len {
            bail!(
                "input line {}: expected {} values, got {}",
                idx + 1,
                len,
                block.len()
            );
        }
        blocks.push(block);
    }
    Ok(blocks)
}

fn run_encode(args: EncodeArgs) -> Result<()> {
    let file = FileSettings::load(args.common.config.as_deref())?;
    let code = resolve_code(&args.common, &file, Some(32))?.build()?;
    let l = resolve(args.l, file.get("l")?, 49);
    let r_seed = resolve(args.r_seed, file.get("r_seed")?, 1);
    let input = resolve(args.input, file.get("input")?, PathBuf::from("-"));
    let output = resolve(args.output, file.get("output")?, PathBuf::from("-"));

    let cfg = BmstConfig::new(code, l, r_seed)?;
    let k = cfg.code().k();
    let words = parse_bit_lines(&read_input(Some(&input))?, k)?;
    if words.is_empty() || words.len() % l != 0 {
        bail!(
            "encode input must hold a positive multiple of l = {} lines, got {}",
            l,
            words.len()
        );
    }
    let mut out = String::new();
    for frame in words.chunks(l) {
        for block in bmst_encode(&cfg, frame)? {
            out.push_str(&block.to_string());
            out.push('\n');
        }
    }
    write_output(Some(&output), &out)
}

fn run_decode(args: DecodeArgs) -> Result<()> {
    let file = FileSettings::load(args.common.config.as_deref())?;
    let code = resolve_code(&args.common, &file, Some(32))?.build()?;
    let l = resolve(args.l, file.get("l")?, 49);
    let r_seed = resolve(args.r_seed, file.get("r_seed")?, 1);
    let threshold = require(args.threshold, file.get("threshold")?, "threshold")?;
    let l_max = resolve(args.l_max, file.get("l_max")?, 64);
    let snr_db: f64 = require(args.snr_db, file.get("snr_db")?, "snr_db")?;
    let input = resolve(args.input, file.get("input")?, PathBuf::from("-"));
    let output = resolve(args.output, file.get("output")?, PathBuf::from("-"));

    let cfg = BmstConfig::new(code, l, r_seed)?;
    let dcfg = DecoderConfig::new(threshold, l_max, ChannelModel::from_snr_db(snr_db))?;
    let n = cfg.code().n();
    let blocks = parse_real_lines(&read_input(Some(&input))?, n)?;
    if blocks.is_empty() || blocks.len() % (l + 1) != 0 {
        bail!(
            "decode input must hold a positive multiple of l + 1 = {} lines, got {}",
            l + 1,
            blocks.len()
        );
    }
    let mut out = String::new();
    for frame in blocks.chunks(l + 1) {
        let (decisions, _) = bmst_decode(&cfg, dcfg, frame)?;
        for word in decisions {
            out.push_str(&word.to_string());
            out.push('\n');
        }
    }
    write_output(Some(&output), &out)
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let file = FileSettings::load(args.common.config.as_deref())?;
    let defaults = ExperimentConfig::default();
    let params = resolve_code(&args.common, &file, Some(defaults.k))?;
    let snr_db = require(
        flag_list(args.snr_db.as_deref())?,
        file.get_list("snr_db")?,
        "snr_db",
    )?;
    let cfg = ExperimentConfig {
        k: params.k,
        memory: params.memory,
        generators: params.generators,
        l: resolve(args.l, file.get("l")?, defaults.l),
        snr_db,
        thresholds: resolve(
            flag_list(args.thresholds.as_deref())?,
            file.get_list("thresholds")?,
            Vec::new(),
        ),
        l_max: resolve(args.l_max, file.get("l_max")?, defaults.l_max),
        frames: resolve(args.frames, file.get("frames")?, defaults.frames),
        master_seed: resolve(args.seed, file.get("seed")?, defaults.master_seed),
        policy: resolve(
            flag_policy(args.policy.as_deref())?,
            file.get("policy")?,
            defaults.policy,
        ),
        learn_trials: resolve(
            args.learn_trials,
            file.get("learn_trials")?,
            defaults.learn_trials,
        ),
        error_cap: resolve(args.error_cap, file.get("error_cap")?, defaults.error_cap),
    };
    let result = run_experiment(&cfg)?;
    let output = resolve(args.output, file.get("output")?, PathBuf::from("-"));
    write_output(Some(&output), &csv_string(&result))
}

fn run_learn(args: LearnArgs) -> Result<()> {
    let file = FileSettings::load(args.common.config.as_deref())?;
    let defaults = ExperimentConfig::default();
    let params = resolve_code(&args.common, &file, Some(defaults.k))?;
    let snr_db: Vec<f64> = require(
        flag_list(args.snr_db.as_deref())?,
        file.get_list("snr_db")?,
        "snr_db",
    )?;
    let l_max = resolve(args.l_max, file.get("l_max")?, defaults.l_max);
    let policy = resolve(
        flag_policy(args.policy.as_deref())?,
        file.get("policy")?,
        defaults.policy,
    );
    let cfg = ExperimentConfig {
        k: params.k,
        memory: params.memory,
        generators: params.generators,
        // sampling trials span two sub-frames regardless of l
        l: 2,
        snr_db: snr_db.clone(),
        thresholds: Vec::new(),
        l_max,
        frames: 1,
        master_seed: resolve(args.seed, file.get("seed")?, defaults.master_seed),
        policy,
        learn_trials: resolve(args.trials, file.get("trials")?, defaults.learn_trials),
        error_cap: 0,
    };
    let mut table = ThresholdTable::new();
    for (point, &snr) in snr_db.iter().enumerate() {
        let threshold = learn_threshold(&cfg, point)?;
        table.insert(ThresholdEntry {
            snr_db: snr,
            k: params.k,
            l_max,
            threshold,
            policy,
        });
    }
    let output = resolve(args.output, file.get("output")?, PathBuf::from("-"));
    write_output(Some(&output), &table.to_csv_string())
}

fn run_wef(args: WefArgs) -> Result<()> {
    let file = FileSettings::load(args.common.config.as_deref())?;
    let code = resolve_code(&args.common, &file, None)?.build()?;
    let a = basic_wef(&code)?;
    let b = ensemble_wef(&a, code.n(), code.k());
    let mut out = String::from("d,a_d,b_d\n");
    for d in 0..=b.degree() {
        out.push_str(&format!("{},{},{}\n", d, a.coeff(d), b.coeff(d)));
    }
    let output = resolve(args.output, file.get("output")?, PathBuf::from("-"));
    write_output(Some(&output), &out)
}

fn run_mi(args: MiArgs) -> Result<()> {
    let file = FileSettings::load(args.config.as_deref())?;
    let snr_db: f64 = require(args.snr_db, file.get("snr_db")?, "snr_db")?;
    let stats = ReferenceStats::compute(snr_db)?;
    let out = format!(
        "snr_db,mutual_information,random_divergence\n{},{},{}\n",
        stats.snr_db, stats.mutual_information, stats.random_divergence
    );
    let output = resolve(args.output, file.get("output")?, PathBuf::from("-"));
    write_output(Some(&output), &out)
}

/// Parses an optional comma-separated list flag.
fn flag_list(raw: Option<&str>) -> Result<Option<Vec<f64>>> {
    raw.map(parse_list).transpose()
}

/// Parses an optional threshold policy flag.
fn flag_policy(raw: Option<&str>) -> Result<Option<ThresholdPolicy>> {
    Ok(raw.map(str::parse).transpose()?)
}
