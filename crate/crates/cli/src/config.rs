//! `key = value` configuration file and its merge with flags and
//! environment. Precedence: flag, then environment, then file, then default.

use std::fs;
use std::path::{Path, PathBuf};

use murmur_core::cache::BadPrimePolicy;
use murmur_core::ec::DEFAULT_NAIVE_CUTOFF;
use murmur_core::satotate::ClampPolicy;
use murmur_core::zeta::DEFAULT_N_MAX;
use murmur_core::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FileConfig {
    pub cache: Option<PathBuf>,
    pub cutoff: Option<u64>,
    pub n_max: Option<usize>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub bad_prime_policy: Option<BadPrimePolicy>,
    pub clamp_policy: Option<ClampPolicy>,
    pub strategy: Option<String>,
}

fn parse_value<T: std::str::FromStr>(line: u64, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid value `{value}` for `{key}`"),
    })
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k as u64 + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(Error::Parse { line, message: format!("expected key = value, got `{body}`") });
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "cache" => cfg.cache = Some(PathBuf::from(value)),
                "cutoff" => cfg.cutoff = Some(parse_value(line, key, value)?),
                "n_max" => cfg.n_max = Some(parse_value(line, key, value)?),
                "threads" => cfg.threads = Some(parse_value(line, key, value)?),
                "out_dir" => cfg.out_dir = Some(PathBuf::from(value)),
                "bad_prime_policy" => cfg.bad_prime_policy = Some(parse_value(line, key, value)?),
                "clamp_policy" => cfg.clamp_policy = Some(parse_value(line, key, value)?),
                "strategy" => cfg.strategy = Some(value.to_string()),
                other => {
                    return Err(Error::Parse { line, message: format!("unknown key `{other}`") });
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

/// Settings after merging every source.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub cache: Option<PathBuf>,
    pub cutoff: u64,
    pub n_max: usize,
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
    pub bad_prime_policy: BadPrimePolicy,
    pub clamp_policy: ClampPolicy,
    pub strategy: String,
}

/// Values supplied on the command line or through the environment.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub cache: Option<PathBuf>,
    pub cutoff: Option<u64>,
    pub n_max: Option<usize>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub bad_prime_policy: Option<BadPrimePolicy>,
    pub clamp_policy: Option<ClampPolicy>,
    pub strategy: Option<String>,
}

impl Config {
    pub fn resolve(over: Overrides, file: FileConfig) -> Result<Self> {
        let cfg = Self {
            cache: over.cache.or(file.cache),
            cutoff: over.cutoff.or(file.cutoff).unwrap_or(DEFAULT_NAIVE_CUTOFF),
            n_max: over.n_max.or(file.n_max).unwrap_or(DEFAULT_N_MAX),
            threads: over.threads.or(file.threads),
            out_dir: over.out_dir.or(file.out_dir).unwrap_or_else(|| PathBuf::from(".")),
            bad_prime_policy: over.bad_prime_policy.or(file.bad_prime_policy).unwrap_or_default(),
            clamp_policy: over.clamp_policy.or(file.clamp_policy).unwrap_or_default(),
            strategy: over.strategy.or(file.strategy).unwrap_or_else(|| "auto".to_string()),
        };
        if cfg.cutoff < 5 {
            return Err(Error::Domain(format!("cutoff must be at least 5, got {}", cfg.cutoff)));
        }
        if cfg.threads == Some(0) {
            return Err(Error::Domain("thread count must be at least 1".into()));
        }
        if cfg.n_max == 0 {
            return Err(Error::Domain("n_max must be at least 1".into()));
        }
        Ok(cfg)
    }
}
