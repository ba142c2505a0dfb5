//! a_p production with an append-only CSV cache (`label,p,ap`).

use std::collections::HashMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::ec::{CurveOverQ, PointCounter};
use crate::family::CurveRecord;
use crate::{Error, Result};

/// Environment variable naming the default cache file.
pub const CACHE_ENV: &str = "MURMUR_CACHE";

const HEADER: &str = "label,p,ap";

/// What to do at primes of bad reduction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BadPrimePolicy {
    /// Leave the curve out at that prime.
    #[default]
    Skip,
    /// Use the ingested a_p if the family file has one, otherwise skip.
    Formal,
    /// Use the ingested a_p; a missing value is an error.
    Strict,
}

impl FromStr for BadPrimePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skip" => Ok(Self::Skip),
            "formal" => Ok(Self::Formal),
            "strict" => Ok(Self::Strict),
            other => Err(Error::Domain(format!(
                "unknown bad-prime policy `{other}` (skip, formal, strict)"
            ))),
        }
    }
}

impl fmt::Display for BadPrimePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Skip => "skip",
            Self::Formal => "formal",
            Self::Strict => "strict",
        })
    }
}

/// Anything a_p can be produced for.
pub trait ApSource: Sync {
    fn cache_label(&self) -> String;

    fn curve(&self) -> &CurveOverQ;

    fn ingested_ap(&self, _p: u64) -> Option<i64> {
        None
    }
}

impl ApSource for CurveOverQ {
    fn cache_label(&self) -> String {
        self.display_label()
    }

    fn curve(&self) -> &CurveOverQ {
        self
    }
}

impl ApSource for CurveRecord {
    fn cache_label(&self) -> String {
        self.label.clone()
    }

    fn curve(&self) -> &CurveOverQ {
        &self.curve
    }

    fn ingested_ap(&self, p: u64) -> Option<i64> {
        self.bad_ap.get(&p).copied()
    }
}

/// a_p without any caching. `None` means the prime is skipped.
pub fn compute_ap<S: ApSource + ?Sized>(
    src: &S,
    p: u64,
    policy: BadPrimePolicy,
    counter: &dyn PointCounter,
) -> Result<Option<i64>> {
    let rc = src.curve().reduce(p);
    if rc.good {
        return Ok(Some(counter.count_points(&rc)?.trace));
    }
    match policy {
        BadPrimePolicy::Skip => Ok(None),
        BadPrimePolicy::Formal => Ok(src.ingested_ap(p)),
        BadPrimePolicy::Strict => src
            .ingested_ap(p)
            .map(Some)
            .ok_or(Error::BadReduction { p }),
    }
}

fn hasse_ok(p: u64, ap: i64) -> bool {
    (ap as i128) * (ap as i128) <= 4 * p as i128
}

/// In-memory index over an append-only `label,p,ap` file.
#[derive(Debug, Default)]
pub struct ApCache {
    path: Option<PathBuf>,
    map: HashMap<(String, u64), i64>,
    pending: Vec<(String, u64, i64)>,
}

impl ApCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or creates) a cache file. A trailing partial line left by an
    /// interrupted write is truncated away.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut map = HashMap::new();
        if path.exists() {
            let mut bytes = std::fs::read(&path)?;
            if let Some(last_nl) = bytes.iter().rposition(|&b| b == b'\n') {
                if last_nl + 1 != bytes.len() {
                    bytes.truncate(last_nl + 1);
                    OpenOptions::new().write(true).open(&path)?.set_len(bytes.len() as u64)?;
                }
            } else {
                bytes.clear();
                File::create(&path)?;
            }
            if !bytes.is_empty() {
                let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes.as_slice());
                if rdr.headers()?.iter().collect::<Vec<_>>().join(",") != HEADER {
                    return Err(Error::Schema(format!("cache header must be `{HEADER}`")));
                }
                for row in rdr.records() {
                    let row = row?;
                    let line = row.position().map(|p| p.line()).unwrap_or(0);
                    let bad = |m: &str| Error::Parse { line, message: m.to_string() };
                    if row.len() != 3 {
                        return Err(bad("expected label,p,ap"));
                    }
                    let p: u64 = row[1].parse().map_err(|_| bad("p is not an integer"))?;
                    let ap: i64 = row[2].parse().map_err(|_| bad("ap is not an integer"))?;
                    if !hasse_ok(p, ap) {
                        return Err(bad("cached a_p violates the Hasse bound"));
                    }
                    map.insert((row[0].to_string(), p), ap);
                }
            }
        }
        Ok(Self {
            path: Some(path),
            map,
            pending: Vec::new(),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn lookup(&self, label: &str, p: u64) -> Option<i64> {
        self.map.get(&(label.to_string(), p)).copied()
    }

    /// Records a value; it reaches disk on the next [`flush`](Self::flush).
    pub fn insert(&mut self, label: &str, p: u64, ap: i64) {
        let key = (label.to_string(), p);
        if self.map.insert(key, ap).is_none() {
            self.pending.push((label.to_string(), p, ap));
        }
    }

    /// Appends pending entries to the backing file in one batch.
    pub fn flush(&mut self) -> Result<()> {
        let Some(path) = &self.path else {
            self.pending.clear();
            return Ok(());
        };
        if self.pending.is_empty() {
            return Ok(());
        }
        let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        if fresh {
            w.write_record(HEADER.split(','))?;
        }
        for (label, p, ap) in self.pending.drain(..) {
            w.write_record([label, p.to_string(), ap.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Computes every missing `(source, p)` in parallel, then merges the
    /// results in source-then-prime order.
    pub fn fill<S: ApSource>(
        &mut self,
        sources: &[S],
        primes: &[u64],
        policy: BadPrimePolicy,
        counter: &dyn PointCounter,
    ) -> Result<()> {
        let labels: Vec<String> = sources.iter().map(ApSource::cache_label).collect();
        let misses: Vec<(usize, u64)> = sources
            .iter()
            .enumerate()
            .flat_map(|(k, _)| primes.iter().map(move |&p| (k, p)))
            .filter(|&(k, p)| self.lookup(&labels[k], p).is_none())
            .collect();
        let computed: Vec<Result<Option<i64>>> = misses
            .par_iter()
            .map(|&(k, p)| compute_ap(&sources[k], p, policy, counter))
            .collect();
        for ((k, p), value) in misses.into_iter().zip(computed) {
            if let Some(ap) = value? {
                self.insert(&labels[k], p, ap);
            }
        }
        self.flush()
    }
}

/// Cached a_p. Bad primes follow `policy` before the cache is consulted, so
/// an ingested value never leaks into a `skip` run.
pub fn get_ap<S: ApSource + ?Sized>(
    cache: &mut ApCache,
    src: &S,
    p: u64,
    policy: BadPrimePolicy,
    counter: &dyn PointCounter,
) -> Result<Option<i64>> {
    let label = src.cache_label();
    let good = src.curve().reduce(p).good;
    if good {
        if let Some(ap) = cache.lookup(&label, p) {
            return Ok(Some(ap));
        }
    }
    let value = compute_ap(src, p, policy, counter)?;
    if let Some(ap) = value {
        cache.insert(&label, p, ap);
    }
    Ok(value)
}

/// Like [`get_ap`] but read-only: a good prime missing from the cache is
/// computed on the spot without being stored.
pub fn peek_ap<S: ApSource + ?Sized>(
    cache: &ApCache,
    src: &S,
    p: u64,
    policy: BadPrimePolicy,
    counter: &dyn PointCounter,
) -> Result<Option<i64>> {
    if src.curve().reduce(p).good {
        if let Some(ap) = cache.lookup(&src.cache_label(), p) {
            return Ok(Some(ap));
        }
    }
    compute_ap(src, p, policy, counter)
}
