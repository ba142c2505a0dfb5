//! Rank-n murmuration series: prime-indexed family averages of normalised
//! rank-n a-invariants.
//!
//! For the i-th prime p the per-curve value is
//!
//! * n = 1: `a_(p,1)`
//! * n = 2: `a_(p,2) + p - 1`
//! * n >= 3: `(a_(p,n) + (n-1) p + n - 5) / (n-1)`
//!
//! computed exactly and only then converted to f64 for averaging.

mod emit;
mod fit;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::{peek_ap, ApCache, ApSource, BadPrimePolicy};
use crate::ec::PointCounter;
use crate::family::FamilyFilter;
use crate::primes::first_k_primes;
use crate::zeta::{to_f64, BetaSequence};
use crate::{Error, Result};

pub use emit::{emit_series, read_csv, write_csv, write_json, write_svg, OutputFormat};
pub use fit::{fit_model, fit_murmuration, model, FitError, FitResult, XAxis};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub i: usize,
    pub p: u64,
    pub value: f64,
    /// Curves that contributed at this prime.
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MurmurationSeries {
    pub n: usize,
    pub filter: Option<FamilyFilter>,
    pub policy: BadPrimePolicy,
    pub family_size: usize,
    pub points: Vec<SeriesPoint>,
    /// Indices i at which every curve was skipped; they have no point.
    pub empty_indices: Vec<usize>,
}

/// Exact normalised rank-n value of one curve at p.
pub fn normalized_value(p: u64, a1: i64, n: usize) -> Result<BigRational> {
    let bs = BetaSequence::new(p, a1, n)?;
    let a_n = bs.a_rank_n(n)?;
    let p = BigRational::from_integer(BigInt::from(p));
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    Ok(match n {
        0 => return Err(Error::Domain("rank must be at least 1".into())),
        1 => a_n,
        2 => a_n + p - int(1),
        n => {
            let m = int(n as i64 - 1);
            (a_n + &m * p + int(n as i64 - 5)) / m
        }
    })
}

#[derive(Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Builds `f_(r,n)(i)` for `i = 1..=i_max`. a_p values are produced through
/// `cache` (misses computed in parallel); averaging runs over the family
/// sorted by label so the result does not depend on input order.
pub fn f_series<S: ApSource>(
    family: &[S],
    n: usize,
    i_max: usize,
    policy: BadPrimePolicy,
    cache: &mut ApCache,
    counter: &dyn PointCounter,
) -> Result<MurmurationSeries> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if n == 0 {
        return Err(Error::Domain("rank must be at least 1".into()));
    }
    let primes = first_k_primes(i_max).into_vec();
    cache.fill(family, &primes, policy, counter)?;

    let mut order: Vec<(String, usize)> = family
        .iter()
        .enumerate()
        .map(|(k, s)| (s.cache_label(), k))
        .collect();
    order.sort();
    let cache = &*cache;

    let per_i: Vec<Result<Option<SeriesPoint>>> = primes
        .par_iter()
        .enumerate()
        .map(|(k, &p)| {
            let mut memo: HashMap<i64, f64> = HashMap::new();
            let mut acc = Kahan::default();
            let mut count = 0;
            for (_, idx) in &order {
                let Some(ap) = peek_ap(cache, &family[*idx], p, policy, counter)? else {
                    continue;
                };
                let v = match memo.get(&ap) {
                    Some(v) => *v,
                    None => {
                        let v = to_f64(&normalized_value(p, ap, n)?);
                        memo.insert(ap, v);
                        v
                    }
                };
                acc.add(v);
                count += 1;
            }
            Ok((count > 0).then(|| SeriesPoint {
                i: k + 1,
                p,
                value: acc.sum / count as f64,
                count,
            }))
        })
        .collect();

    let mut points = Vec::with_capacity(primes.len());
    let mut empty_indices = Vec::new();
    for (k, r) in per_i.into_iter().enumerate() {
        match r? {
            Some(pt) => points.push(pt),
            None => empty_indices.push(k + 1),
        }
    }
    Ok(MurmurationSeries {
        n,
        filter: None,
        policy,
        family_size: family.len(),
        points,
        empty_indices,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesComparison {
    /// `(i, p, |s1 - s2|)` per point.
    pub diffs: Vec<(usize, u64, f64)>,
    pub max: f64,
    pub mean: f64,
}

pub fn compare_series(s1: &MurmurationSeries, s2: &MurmurationSeries) -> Result<SeriesComparison> {
    let grid = |s: &MurmurationSeries| s.points.iter().map(|p| (p.i, p.p)).collect::<Vec<_>>();
    if grid(s1) != grid(s2) {
        return Err(Error::GridMismatch);
    }
    let diffs: Vec<(usize, u64, f64)> = s1
        .points
        .iter()
        .zip(&s2.points)
        .map(|(a, b)| (a.i, a.p, (a.value - b.value).abs()))
        .collect();
    let max = diffs.iter().map(|d| d.2).fold(0.0, f64::max);
    let mean = if diffs.is_empty() {
        0.0
    } else {
        diffs.iter().map(|d| d.2).sum::<f64>() / diffs.len() as f64
    };
    Ok(SeriesComparison { diffs, max, mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::{CurveOverQ, NaiveCounter};

    fn e37() -> CurveOverQ {
        CurveOverQ::from_i64([0, 0, 1, -1, 0]).unwrap().with_label("37.a1").with_conductor(37)
    }

    #[test]
    fn single_curve_first_prime() {
        let mut cache = ApCache::in_memory();
        let s = f_series(&[e37()], 1, 1, BadPrimePolicy::Skip, &mut cache, &NaiveCounter).unwrap();
        assert_eq!(s.points, vec![SeriesPoint { i: 1, p: 2, value: -2.0, count: 1 }]);
    }

    #[test]
    fn normalised_values() {
        // n = 2 reproduces a1 exactly.
        for (p, a) in [(5u64, -2i64), (101, 10), (2, 2), (3, 0)] {
            assert_eq!(normalized_value(p, a, 2).unwrap(), BigRational::from_integer(a.into()));
        }
        // n = 3 at (3, 0): (-4 + 6 - 2)/2 = 0
        assert_eq!(normalized_value(3, 0, 3).unwrap(), BigRational::from_integer(0.into()));
    }

    #[test]
    fn two_curve_mean() {
        // y^2 = x^3 - x has a_5 = -2; y^2 = x^3 + 1 has a_5 = 0.
        let fam = vec![
            CurveOverQ::from_i64([0, 0, 0, -1, 0]).unwrap().with_label("a"),
            CurveOverQ::from_i64([0, 0, 0, 0, 1]).unwrap().with_label("b"),
        ];
        let mut cache = ApCache::in_memory();
        let s = f_series(&fam, 1, 3, BadPrimePolicy::Skip, &mut cache, &NaiveCounter).unwrap();
        let at5 = s.points.iter().find(|p| p.p == 5).unwrap();
        assert_eq!((at5.value, at5.count), (-1.0, 2));
        // both curves are bad at 2, and y^2 = x^3 + 1 is bad at 3
        assert_eq!(s.empty_indices, vec![1]);
        assert_eq!(s.points[0].count, 1);
    }

    #[test]
    fn empty_family() {
        let mut cache = ApCache::in_memory();
        let fam: Vec<CurveOverQ> = Vec::new();
        assert!(matches!(
            f_series(&fam, 1, 5, BadPrimePolicy::Skip, &mut cache, &NaiveCounter),
            Err(Error::EmptyFamily)
        ));
    }

    #[test]
    fn comparison() {
        let mut cache = ApCache::in_memory();
        let s1 = f_series(&[e37()], 1, 30, BadPrimePolicy::Skip, &mut cache, &NaiveCounter).unwrap();
        let s2 = f_series(&[e37()], 2, 30, BadPrimePolicy::Skip, &mut cache, &NaiveCounter).unwrap();
        let c = compare_series(&s1, &s1).unwrap();
        assert!(c.diffs.iter().all(|d| d.2 == 0.0));
        assert!(compare_series(&s1, &s2).unwrap().max <= 1e-10);
        let short = f_series(&[e37()], 1, 10, BadPrimePolicy::Skip, &mut cache, &NaiveCounter).unwrap();
        assert!(matches!(compare_series(&s1, &short), Err(Error::GridMismatch)));
    }
}
