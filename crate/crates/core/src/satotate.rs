//! Sato-Tate statistics for the rank-n angles of one curve: samples of
//! Delta (or theta for n = 1) over primes up to a bound, histograms and the
//! Kolmogorov-Smirnov distance to the law with density `2/pi sin^2`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::cache::{peek_ap, ApCache, ApSource, BadPrimePolicy};
use crate::ec::PointCounter;
use crate::fmt::sig12;
use crate::primes::primes_up_to;
use crate::zeta::BetaSequence;
use crate::{svg, Error, Result};

/// `F(theta) = (theta - sin theta cos theta) / pi` on `[0, pi]`.
pub fn st_cdf(theta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} is outside [0, pi]")));
    }
    Ok(cdf(theta))
}

fn cdf(theta: f64) -> f64 {
    ((theta - theta.sin() * theta.cos()) / PI).clamp(0.0, 1.0)
}

pub fn st_density(theta: f64) -> f64 {
    2.0 / PI * theta.sin().powi(2)
}

/// Inverse of [`st_cdf`] by bisection; `u` is clamped to `[0, 1]`.
pub fn st_inverse_cdf(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct STSample {
    pub p: u64,
    /// Big Delta for n >= 2, `a_p / (2 sqrt p)` for n = 1.
    pub delta: f64,
    /// `arccos(clamp(delta, -1, 1))`.
    pub theta_tilde: f64,
    pub clamped: bool,
}

impl STSample {
    pub fn new(p: u64, delta: f64) -> Self {
        Self {
            p,
            delta,
            theta_tilde: delta.clamp(-1.0, 1.0).acos(),
            clamped: !(-1.0..=1.0).contains(&delta),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<STSample>,
    /// Primes dropped because no a_p was available there.
    pub skipped_primes: Vec<u64>,
}

/// Whether out-of-range Delta values take part in the statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClampPolicy {
    /// Keep them, at theta = 0 or pi.
    #[default]
    Include,
    Exclude,
}

impl FromStr for ClampPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "include" => Ok(Self::Include),
            "exclude" => Ok(Self::Exclude),
            other => Err(Error::Domain(format!("unknown clamp policy `{other}` (include, exclude)"))),
        }
    }
}

impl fmt::Display for ClampPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Include => "include",
            Self::Exclude => "exclude",
        })
    }
}

/// Delta (or theta) of a single a_p at rank n.
pub fn sample_from_ap(p: u64, ap: i64, n: usize) -> Result<STSample> {
    if n == 0 {
        return Err(Error::Domain("rank must be at least 1".into()));
    }
    if n == 1 {
        return Ok(STSample::new(p, ap as f64 / (2.0 * (p as f64).sqrt())));
    }
    let inv = BetaSequence::new(p, ap, n)?.zeta_polynomial(n)?;
    let angle = inv.delta_n(&inv.theta_n())?;
    Ok(STSample::new(p, angle.delta.expect("n >= 2")))
}

/// One sample per prime `p <= bound` at which an a_p is available under
/// `policy`. CM curves are refused unless `allow_cm` is set.
pub fn delta_samples<S: ApSource>(
    src: &S,
    n: usize,
    bound: u64,
    policy: BadPrimePolicy,
    allow_cm: bool,
    cache: &mut ApCache,
    counter: &dyn PointCounter,
) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::Domain("rank must be at least 1".into()));
    }
    if !allow_cm && src.curve().is_cm()? {
        return Err(Error::ComplexMultiplication(src.cache_label()));
    }
    let primes = primes_up_to(bound).into_vec();
    cache.fill(std::slice::from_ref(src), &primes, policy, counter)?;
    let cache = &*cache;
    let results: Vec<Result<(u64, Option<STSample>)>> = primes
        .par_iter()
        .map(|&p| {
            let sample = match peek_ap(cache, src, p, policy, counter)? {
                Some(ap) => Some(sample_from_ap(p, ap, n)?),
                None => None,
            };
            Ok((p, sample))
        })
        .collect();
    let mut set = SampleSet {
        samples: Vec::with_capacity(primes.len()),
        skipped_primes: Vec::new(),
    };
    for r in results {
        match r? {
            (_, Some(s)) => set.samples.push(s),
            (p, None) => set.skipped_primes.push(p),
        }
    }
    Ok(set)
}

/// Sup distance between the empirical CDF of `theta_tilde` and [`st_cdf`].
pub fn ks_statistic(samples: &[STSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut thetas: Vec<f64> = samples.iter().map(|s| s.theta_tilde).collect();
    thetas.sort_by(f64::total_cmp);
    let m = thetas.len() as f64;
    let d = thetas.iter().enumerate().fold(0.0f64, |d, (k, &t)| {
        let f = cdf(t);
        d.max((k + 1) as f64 / m - f).max(f - k as f64 / m)
    });
    Ok(d.clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    /// `bins + 1` equal-width edges over `[0, pi]`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Bins are `[a, b)` except the last, which also takes theta = pi.
pub fn histogram(samples: &[STSample], bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::Domain("need at least one bin".into()));
    }
    let width = PI / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|k| if k == bins { PI } else { k as f64 * width })
        .collect();
    let mut counts = vec![0u64; bins];
    for s in samples {
        let t = s.theta_tilde;
        let mut k = ((t / width).floor() as usize).min(bins - 1);
        if k > 0 && t < edges[k] {
            k -= 1;
        }
        if k + 1 < bins && t >= edges[k + 1] {
            k += 1;
        }
        counts[k] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Probability mass of the Sato-Tate law in each histogram bin.
pub fn expected_bin_mass(edges: &[f64]) -> Vec<f64> {
    edges.windows(2).map(|w| cdf(w[1]) - cdf(w[0])).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct STReport {
    pub n: usize,
    #[serde(rename = "N")]
    pub bound: u64,
    /// Samples entering the histogram and KS statistic.
    pub sample_count: usize,
    /// Samples whose Delta fell outside [-1, 1].
    pub clamp_count: usize,
    pub clamp_policy: ClampPolicy,
    pub skipped_primes: usize,
    pub ks: f64,
    pub bins: Vec<f64>,
    pub counts: Vec<u64>,
}

pub fn build_report(set: &SampleSet, n: usize, bound: u64, bins: usize, clamp: ClampPolicy) -> Result<STReport> {
    let used: Vec<STSample> = match clamp {
        ClampPolicy::Include => set.samples.clone(),
        ClampPolicy::Exclude => set.samples.iter().filter(|s| !s.clamped).copied().collect(),
    };
    let hist = histogram(&used, bins)?;
    Ok(STReport {
        n,
        bound,
        sample_count: used.len(),
        clamp_count: set.samples.iter().filter(|s| s.clamped).count(),
        clamp_policy: clamp,
        skipped_primes: set.skipped_primes.len(),
        ks: ks_statistic(&used)?,
        bins: hist.edges,
        counts: hist.counts,
    })
}

fn round12(v: f64) -> f64 {
    sig12(v).parse().unwrap_or(v)
}

pub fn write_report_json<W: Write>(report: &STReport, writer: W) -> Result<()> {
    let mut r = report.clone();
    r.ks = round12(r.ks);
    r.bins.iter_mut().for_each(|b| *b = round12(*b));
    serde_json::to_writer_pretty(writer, &r)?;
    Ok(())
}

/// CSV `p,delta,theta_tilde,clamped`.
pub fn write_samples_csv<W: Write>(samples: &[STSample], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["p", "delta", "theta_tilde", "clamped"])?;
    for s in samples {
        w.write_record([
            s.p.to_string(),
            sig12(s.delta),
            sig12(s.theta_tilde),
            s.clamped.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Density-normalised histogram with the `2/pi sin^2` curve on top.
pub fn write_histogram_svg<W: Write>(report: &STReport, title: &str, mut writer: W) -> Result<()> {
    let total = report.sample_count.max(1) as f64;
    let heights: Vec<f64> = report
        .counts
        .iter()
        .zip(report.bins.windows(2))
        .map(|(&c, w)| c as f64 / (total * (w[1] - w[0])))
        .collect();
    let overlay: Vec<(f64, f64)> = (0..=200)
        .map(|k| {
            let t = PI * k as f64 / 200.0;
            (t, st_density(t))
        })
        .collect();
    let x_label = if report.n == 1 { "theta" } else { "arccos(Delta)" };
    let doc = svg::histogram(&report.bins, &heights, Some(&overlay), title, x_label, "density");
    writer.write_all(doc.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::{CurveOverQ, NaiveCounter};
    use std::f64::consts::FRAC_PI_2;

    fn e37() -> CurveOverQ {
        CurveOverQ::from_i64([0, 0, 1, -1, 0]).unwrap().with_label("37a").with_conductor(37)
    }

    fn at(theta: f64) -> STSample {
        STSample::new(0, theta.cos())
    }

    #[test]
    fn cdf_values() {
        assert_eq!(st_cdf(0.0).unwrap(), 0.0);
        assert!((st_cdf(FRAC_PI_2).unwrap() - 0.5).abs() < 1e-15);
        assert!((st_cdf(PI).unwrap() - 1.0).abs() < 1e-15);
        assert!(st_cdf(-0.1).is_err());
        assert!(st_cdf(3.2).is_err());
        for u in [0.0, 0.1, 0.5, 0.77, 1.0] {
            assert!((cdf(st_inverse_cdf(u)) - u).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_two_samples_of_37a() {
        let set = delta_samples(&e37(), 2, 10, BadPrimePolicy::Skip, false, &mut ApCache::in_memory(), &NaiveCounter).unwrap();
        let ps: Vec<u64> = set.samples.iter().map(|s| s.p).collect();
        assert_eq!(ps, [2, 3, 5, 7]);
        let ap = [-2i64, -3, -2, -1];
        for (s, a) in set.samples.iter().zip(ap) {
            let want = a as f64 / (2.0 * (s.p as f64).sqrt());
            assert!((s.delta - want).abs() < 1e-10, "p = {}", s.p);
        }
        assert!((set.samples[0].delta + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn rank_one_uses_theta() {
        let set = delta_samples(&e37(), 1, 10, BadPrimePolicy::Skip, false, &mut ApCache::in_memory(), &NaiveCounter).unwrap();
        let s = set.samples[1];
        assert_eq!(s.p, 3);
        assert!((s.theta_tilde - (-3.0 / (2.0 * 3f64.sqrt())).acos()).abs() < 1e-15);
    }

    #[test]
    fn cm_rejected_unless_allowed() {
        let cm = CurveOverQ::from_i64([0, 0, 0, -1, 0]).unwrap().with_conductor(32);
        let run = |allow| delta_samples(&cm, 2, 50, BadPrimePolicy::Skip, allow, &mut ApCache::in_memory(), &NaiveCounter);
        assert!(matches!(run(false), Err(Error::ComplexMultiplication(_))));
        assert!(run(true).is_ok());
    }

    #[test]
    fn ks_trivial_cases() {
        assert!((ks_statistic(&[at(FRAC_PI_2)]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(ks_statistic(&[STSample::new(0, 1.0); 5]).unwrap(), 1.0);
        assert!(matches!(ks_statistic(&[]), Err(Error::EmptySample)));
    }

    #[test]
    fn ks_inverse_cdf_grid() {
        let m = 10_000;
        let samples: Vec<STSample> = (0..m)
            .map(|k| {
                let t = st_inverse_cdf((k as f64 + 0.5) / m as f64);
                STSample { p: 0, delta: t.cos(), theta_tilde: t, clamped: false }
            })
            .collect();
        assert!(ks_statistic(&samples).unwrap() <= 2e-4);
    }

    #[test]
    fn half_open_bins() {
        let s = [at(PI / 4.0), at(PI / 4.0), at(3.0 * PI / 4.0), STSample { p: 0, delta: 0.0, theta_tilde: FRAC_PI_2, clamped: false }];
        assert_eq!(histogram(&s, 2).unwrap().counts, [2, 2]);
        assert_eq!(histogram(&[], 3).unwrap().counts, [0, 0, 0]);
        assert_eq!(histogram(&[STSample::new(0, -1.0)], 3).unwrap().counts, [0, 0, 1]);
        assert!(histogram(&s, 0).is_err());
    }

    #[test]
    fn report_and_outputs() {
        let set = SampleSet {
            samples: vec![at(0.3), STSample::new(7, 1.4), at(2.0)],
            skipped_primes: vec![2],
        };
        let inc = build_report(&set, 3, 10, 4, ClampPolicy::Include).unwrap();
        assert_eq!((inc.sample_count, inc.clamp_count), (3, 1));
        assert_eq!(inc.counts.iter().sum::<u64>(), 3);
        let exc = build_report(&set, 3, 10, 4, ClampPolicy::Exclude).unwrap();
        assert_eq!((exc.sample_count, exc.clamp_count), (2, 1));

        let mut json = Vec::new();
        write_report_json(&inc, &mut json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(v["N"], 10);
        assert_eq!(v["counts"].as_array().unwrap().len(), 4);

        let mut svg_out = Vec::new();
        write_histogram_svg(&inc, "test", &mut svg_out).unwrap();
        let text = String::from_utf8(svg_out).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.descendants().filter(|n| n.attribute("class") == Some("bar")).count(), 4);

        let mut csv_out = Vec::new();
        write_samples_csv(&set.samples, &mut csv_out).unwrap();
        assert_eq!(String::from_utf8(csv_out).unwrap().lines().count(), 4);
    }
}
