//! Point counting strategies and their name registry.

pub mod bsgs;
pub mod naive;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::field::isqrt;
use super::ReducedCurve;
use crate::{Error, Result};

/// Primes up to this bound are counted by enumeration under `auto`.
pub const DEFAULT_NAIVE_CUTOFF: u64 = 1 << 14;

/// Number of F_p-points (including infinity) and the trace `p + 1 - N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PointCount {
    pub p: u64,
    pub n_points: u64,
    pub trace: i64,
}

impl PointCount {
    /// Checks the Hasse bound `t^2 <= 4p` in exact integers.
    pub fn new(p: u64, n_points: u64) -> Result<Self> {
        let trace = p as i128 + 1 - n_points as i128;
        if trace * trace > 4 * p as i128 {
            return Err(Error::HasseViolation { p, n_points });
        }
        Ok(Self {
            p,
            n_points,
            trace: trace as i64,
        })
    }
}

/// Inclusive Hasse interval `[p + 1 - floor(2 sqrt p), p + 1 + floor(2 sqrt p)]`.
pub fn hasse_interval(p: u64) -> (u64, u64) {
    let w = isqrt(4 * p);
    (p + 1 - w, p + 1 + w)
}

/// A way of computing `#E(F_p)`. Implementations must be pure functions of
/// the reduced curve.
pub trait PointCounter: Send + Sync {
    fn name(&self) -> &'static str;

    fn count_points(&self, rc: &ReducedCurve) -> Result<PointCount>;
}

/// Picks enumeration below a cutoff and baby-step giant-step above it.
#[derive(Clone, Copy, Debug)]
pub struct AutoCounter {
    pub naive_cutoff: u64,
}

impl Default for AutoCounter {
    fn default() -> Self {
        Self {
            naive_cutoff: DEFAULT_NAIVE_CUTOFF,
        }
    }
}

impl PointCounter for AutoCounter {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn count_points(&self, rc: &ReducedCurve) -> Result<PointCount> {
        if rc.p <= self.naive_cutoff {
            naive::NaiveCounter.count_points(rc)
        } else {
            bsgs::BsgsCounter::default().count_points(rc)
        }
    }
}

/// Point counters keyed by name.
pub struct CounterRegistry {
    counters: BTreeMap<&'static str, Arc<dyn PointCounter>>,
}

impl CounterRegistry {
    pub fn empty() -> Self {
        Self {
            counters: BTreeMap::new(),
        }
    }

    /// `naive`, `bsgs` and `auto` (with the given enumeration cutoff).
    pub fn with_defaults(naive_cutoff: u64) -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(naive::NaiveCounter));
        reg.register(Arc::new(bsgs::BsgsCounter::default()));
        reg.register(Arc::new(AutoCounter { naive_cutoff }));
        reg
    }

    /// Registers a counter under its own name, replacing any previous entry.
    pub fn register(&mut self, counter: Arc<dyn PointCounter>) {
        self.counters.insert(counter.name(), counter);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn PointCounter>> {
        self.counters
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.counters.keys().copied()
    }
}

impl Default for CounterRegistry {
    fn default() -> Self {
        Self::with_defaults(DEFAULT_NAIVE_CUTOFF)
    }
}
