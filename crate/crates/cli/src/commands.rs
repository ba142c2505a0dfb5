use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use murmur_core::cache::{peek_ap, ApCache, ApSource};
use murmur_core::ec::{CounterRegistry, CurveOverQ, PointCounter};
use murmur_core::family::{self, parse_conductor_range, CurveRecord, FamilyFilter};
use murmur_core::fmt::{ratio, sig12};
use murmur_core::murmuration::{self, f_series, fit_murmuration, FitError, OutputFormat, XAxis};
use murmur_core::primes::primes_up_to;
use murmur_core::satotate::{self, build_report, delta_samples};
use murmur_core::zeta::BetaSequence;
use murmur_core::{Error, Result};
use serde_json::{json, Value};

use crate::config::Config;
use crate::CurveInput;

pub struct Context {
    cfg: Config,
    counter: Arc<dyn PointCounter>,
}

/// Either an ad-hoc model or a family record (which may carry bad-prime
/// data).
enum Source {
    Model(CurveOverQ),
    Record(CurveRecord),
}

fn num(v: f64) -> Value {
    let r: f64 = sig12(v).parse().unwrap_or(v);
    serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
}

fn write_json_file(path: &Path, value: &Value) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn parse_ainvs(spec: &str) -> Result<CurveOverQ> {
    spec.parse()
}

impl Context {
    pub fn new(cfg: Config) -> Result<Self> {
        let counter = CounterRegistry::with_defaults(cfg.cutoff).get(&cfg.strategy)?;
        Ok(Self { cfg, counter })
    }

    fn open_cache(&self) -> Result<ApCache> {
        match &self.cfg.cache {
            Some(path) => ApCache::open(path),
            None => Ok(ApCache::in_memory()),
        }
    }

    fn check_rank(&self, n: usize) -> Result<()> {
        if n > self.cfg.n_max {
            return Err(Error::Domain(format!("rank n = {n} exceeds n_max = {}", self.cfg.n_max)));
        }
        Ok(())
    }

    fn out_path(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.cfg.out_dir)?;
        Ok(self.cfg.out_dir.join(name))
    }

    fn source(&self, input: &CurveInput, family: Option<&Path>) -> Result<Source> {
        if let Some(spec) = &input.curve {
            return parse_ainvs(spec).map(Source::Model);
        }
        let label = input.label.as_deref().expect("clap requires --curve or --label");
        let path = family.expect("clap requires --family with --label");
        let records = family::read_family_file(path)?;
        family::find_label(&records, label)
            .cloned()
            .map(Source::Record)
            .ok_or_else(|| Error::Domain(format!("label `{label}` not found in {}", path.display())))
    }

    pub fn ap(&self, input: &CurveInput, family: Option<&Path>, pmax: u64, out: Option<&Path>) -> Result<()> {
        let rows = match self.source(input, family)? {
            Source::Model(c) => self.ap_rows(&c, pmax)?,
            Source::Record(r) => self.ap_rows(&r, pmax)?,
        };
        let sink: Box<dyn Write> = match out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(io::stdout().lock()),
        };
        let mut w = sink;
        writeln!(w, "p,ap")?;
        for (p, ap) in rows {
            writeln!(w, "{p},{ap}")?;
        }
        w.flush()?;
        Ok(())
    }

    fn ap_rows<S: ApSource>(&self, src: &S, pmax: u64) -> Result<Vec<(u64, i64)>> {
        let primes = primes_up_to(pmax).into_vec();
        let mut cache = self.open_cache()?;
        let policy = self.cfg.bad_prime_policy;
        cache.fill(std::slice::from_ref(src), &primes, policy, self.counter.as_ref())?;
        let mut rows = Vec::new();
        for p in primes {
            if let Some(ap) = peek_ap(&cache, src, p, policy, self.counter.as_ref())? {
                rows.push((p, ap));
            }
        }
        Ok(rows)
    }

    pub fn zeta(&self, q: u64, a1: i64, n: usize) -> Result<()> {
        self.check_rank(n)?;
        let bs = BetaSequence::new(q, a1, n)?;
        let inv = bs.zeta_polynomial(n)?;
        let angles = inv.angles();
        let report = json!({
            "q": q,
            "a1": a1,
            "n": n,
            "betas": bs.betas().iter().map(ratio).collect::<Vec<_>>(),
            "alpha_n": ratio(&inv.alpha_n),
            "a_n": ratio(&inv.a_n),
            "P": inv.p_coeffs.iter().map(ratio).collect::<Vec<_>>(),
            "theta": num(angles.theta),
            "delta": angles.delta.map_or(Value::Null, num),
            "clamped": angles.clamped,
            "rh": inv.rh_check(),
        });
        let mut out = io::stdout().lock();
        serde_json::to_writer_pretty(&mut out, &report)?;
        writeln!(out)?;
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    pub fn murmurate(
        &self,
        family_path: &Path,
        rank: u32,
        conductor: &str,
        n: usize,
        imax: usize,
        fit: bool,
        axis: XAxis,
        dedupe: bool,
    ) -> Result<()> {
        self.check_rank(n)?;
        let (lo, hi) = parse_conductor_range(conductor)?;
        let filter = FamilyFilter::new(rank, lo, hi)?;
        let family = family::load_family(family_path, &filter, dedupe)?;
        let mut cache = self.open_cache()?;
        let mut series = f_series(&family, n, imax, self.cfg.bad_prime_policy, &mut cache, self.counter.as_ref())?;
        series.filter = Some(filter);
        if !series.empty_indices.is_empty() {
            eprintln!(
                "murmur: warning: every curve skipped at {} prime indices",
                series.empty_indices.len()
            );
        }

        let stem = format!("murmuration_r{rank}_n{n}_{lo}-{hi}");
        for format in [OutputFormat::Csv, OutputFormat::Json, OutputFormat::Svg] {
            let path = self.out_path(&format!("{stem}.{}", format.extension()))?;
            murmuration::emit_series(&series, format, axis, &path)?;
            println!("{}", path.display());
        }

        if fit {
            let path = self.out_path(&format!("{stem}_fit.json"))?;
            let report = match fit_murmuration(&series, axis) {
                Ok(r) => json!({
                    "x_axis": axis,
                    "converged": true,
                    "A": num(r.a),
                    "alpha": num(r.alpha),
                    "B": num(r.b),
                    "beta": num(r.beta),
                    "residual_rms": num(r.residual_rms),
                    "iterations": r.iterations,
                }),
                Err(FitError::NonConvergence { best }) => {
                    eprintln!("murmur: warning: fit did not converge; reporting the best grid candidate");
                    json!({
                        "x_axis": axis,
                        "converged": false,
                        "A": num(best.a),
                        "alpha": num(best.alpha),
                        "B": num(best.b),
                        "beta": num(best.beta),
                        "residual_rms": num(best.residual_rms),
                        "iterations": best.iterations,
                    })
                }
                Err(e) => return Err(Error::Domain(format!("cannot fit: {e}"))),
            };
            write_json_file(&path, &report)?;
            println!("{}", path.display());
        }
        Ok(())
    }

    pub fn satotate(
        &self,
        input: &CurveInput,
        family: Option<&Path>,
        n: usize,
        pmax: u64,
        bins: usize,
        allow_cm: bool,
    ) -> Result<()> {
        self.check_rank(n)?;
        let source = self.source(input, family)?;
        let mut cache = self.open_cache()?;
        let policy = self.cfg.bad_prime_policy;
        let counter = self.counter.as_ref();
        let (set, name) = match &source {
            Source::Model(c) => (
                delta_samples(c, n, pmax, policy, allow_cm, &mut cache, counter)?,
                c.label.clone().unwrap_or_else(|| {
                    c.ainvs.iter().map(ToString::to_string).collect::<Vec<_>>().join("_")
                }),
            ),
            Source::Record(r) => (
                delta_samples(r, n, pmax, policy, allow_cm, &mut cache, counter)?,
                r.label.clone(),
            ),
        };
        let report = build_report(&set, n, pmax, bins, self.cfg.clamp_policy)?;

        let stem: String = format!("satotate_{name}_n{n}_N{pmax}")
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || "_-.".contains(c) { c } else { '_' })
            .collect();
        let json_path = self.out_path(&format!("{stem}.json"))?;
        let mut out = BufWriter::new(File::create(&json_path)?);
        satotate::write_report_json(&report, &mut out)?;
        writeln!(out)?;
        out.flush()?;

        let svg_path = self.out_path(&format!("{stem}.svg"))?;
        let title = format!("{name}: rank-{n} Sato-Tate, p <= {pmax}");
        let mut out = BufWriter::new(File::create(&svg_path)?);
        satotate::write_histogram_svg(&report, &title, &mut out)?;
        out.flush()?;

        let csv_path = self.out_path(&format!("{stem}_samples.csv"))?;
        let mut out = BufWriter::new(File::create(&csv_path)?);
        satotate::write_samples_csv(&set.samples, &mut out)?;
        out.flush()?;

        let mut stdout = io::stdout().lock();
        satotate::write_report_json(&report, &mut stdout)?;
        writeln!(stdout)?;
        Ok(())
    }
}
