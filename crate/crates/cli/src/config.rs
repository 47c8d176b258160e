//! Key=value configuration files shared by every subcommand.
//!
//! A config file assigns one setting per line as `key = value`, with blank
//! lines and `#` comments skipped. List values are comma separated. Every
//! key has a command line flag of the same name, and the flag wins when
//! both are given, so a file can hold a baseline setup that individual
//! runs tweak.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Keys a config file may assign. Anything else is treated as a typo and
/// rejected, so a misspelled setting cannot silently change an experiment.
const KNOWN_KEYS: &[&str] = &[
    "error_cap",
    "frames",
    "generators",
    "input",
    "k",
    "l",
    "l_max",
    "learn_trials",
    "output",
    "policy",
    "r_seed",
    "seed",
    "snr_db",
    "threshold",
    "thresholds",
    "trials",
];

/// Settings read from one config file, or none at all.
#[derive(Debug, Default)]
pub struct FileSettings {
    map: HashMap<String, String>,
}

impl FileSettings {
    /// Loads the file when a path is given; otherwise stays empty.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut map = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "{}:{}: expected key = value, got {:?}",
                    path.display(),
                    idx + 1,
                    raw
                );
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                bail!("{}:{}: unknown setting {:?}", path.display(), idx + 1, key);
            }
            if map.insert(key.to_string(), value.to_string()).is_some() {
                bail!("{}:{}: duplicate setting {:?}", path.display(), idx + 1, key);
            }
        }
        Ok(Self { map })
    }

    /// A single typed value, when the key is present.
    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("config setting {} = {:?}: {}", key, raw, e)),
        }
    }

    /// A comma-separated list, when the key is present.
    pub fn get_list<T>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => parse_list(raw)
                .map(Some)
                .with_context(|| format!("config setting {}", key)),
        }
    }
}

/// Parses a comma-separated list of typed values.
pub fn parse_list<T>(raw: &str) -> Result<Vec<T>>
where
    T: FromStr,
    T::Err: Display,
{
    raw.split(',')
        .map(|part| {
            let part = part.trim();
            part.parse()
                .map_err(|e| anyhow!("bad list entry {:?}: {}", part, e))
        })
        .collect()
}

/// Parses two generator polynomials given as binary strings of equal
/// length, leftmost character first; the encoder memory is that length
/// minus one.
pub fn parse_generators(raw: &str) -> Result<(usize, [u32; 2])> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        bail!("expected two generators separated by a comma, got {:?}", raw);
    }
    if parts[0].len() != parts[1].len() {
        bail!(
            "generators {:?} and {:?} differ in length",
            parts[0],
            parts[1]
        );
    }
    if parts[0].len() < 2 || parts[0].len() > 32 {
        bail!("generator length must be between 2 and 32 bits");
    }
    let mut generators = [0u32; 2];
    for (g, part) in generators.iter_mut().zip(&parts) {
        for (i, c) in part.chars().enumerate() {
            match c {
                '0' => {}
                '1' => *g |= 1 << i,
                _ => bail!("generator {:?} has a character other than 0 or 1", part),
            }
        }
    }
    Ok((parts[0].len() - 1, generators))
}

/// The effective value of one setting: flag beats file beats default.
pub fn resolve<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Like [`resolve`] for settings with no default to fall back on.
pub fn require<T>(flag: Option<T>, file: Option<T>, what: &str) -> Result<T> {
    flag.or(file).ok_or_else(|| {
        anyhow!(
            "missing {}: pass the flag or set it in the config file",
            what
        )
    })
}
