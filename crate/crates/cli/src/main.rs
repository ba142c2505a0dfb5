//! `murmur`: a_p tables, rank-n zeta data, murmuration series and Sato-Tate
//! reports from the command line.
//!
//! Exit status: 0 on success, 1 for I/O or parse failures, 2 for usage
//! errors and domain rejections (CM curve, bad reduction, empty family).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use murmur_core::cache::{BadPrimePolicy, CACHE_ENV};
use murmur_core::murmuration::XAxis;
use murmur_core::satotate::ClampPolicy;

use crate::config::{Config, FileConfig, Overrides};

#[derive(Parser, Debug)]
#[command(name = "murmur", version, about = "Rank-n zeta invariants, murmurations and Sato-Tate statistics of elliptic curves")]
struct Cli {
    /// key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "MURMUR_THREADS")]
    threads: Option<usize>,
    /// Append-only a_p cache (`label,p,ap`).
    #[arg(long, global = true, env = CACHE_ENV)]
    cache: Option<PathBuf>,
    /// Point-counting strategy: auto, naive or bsgs.
    #[arg(long, global = true)]
    strategy: Option<String>,
    /// Largest p counted naively by the auto strategy.
    #[arg(long, global = true)]
    cutoff: Option<u64>,
    /// Largest rank n accepted.
    #[arg(long, global = true)]
    n_max: Option<usize>,
    /// Directory for output files.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Handling of bad primes: skip, formal or strict.
    #[arg(long, global = true)]
    bad_prime_policy: Option<BadPrimePolicy>,

    #[command(subcommand)]
    command: Command,
}

/// A curve given by its a-invariants or by a label in a family file.
#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct CurveInput {
    /// a-invariants `a1,a2,a3,a4,a6`.
    #[arg(long, allow_hyphen_values = true)]
    pub curve: Option<String>,
    /// Label resolved against `--family`.
    #[arg(long, requires = "family")]
    pub label: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// CSV of (p, a_p) for every prime up to pmax with an a_p.
    Ap {
        #[command(flatten)]
        input: CurveInput,
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long)]
        pmax: u64,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank-n zeta data for (q, a1) as JSON.
    Zeta {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        q: u64,
        #[arg(long, allow_hyphen_values = true)]
        a1: i64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
    },
    /// Murmuration series of a family, with optional model fit.
    Murmurate {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        rank: u32,
        /// Conductor range `N1:N2`.
        #[arg(long)]
        conductor: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        imax: u64,
        /// Fit y = A x^alpha sin(B x^beta) and write the parameters as JSON.
        #[arg(long)]
        fit: bool,
        /// Abscissa for the plot and the fit: i or p.
        #[arg(long, default_value = "i")]
        x_axis: XAxis,
        /// Keep every curve of an isogeny class instead of one per class.
        #[arg(long)]
        all_isogenous: bool,
    },
    /// Sato-Tate report (JSON, SVG histogram, sample CSV) for one curve.
    Satotate {
        #[command(flatten)]
        input: CurveInput,
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long)]
        pmax: u64,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        bins: u64,
        /// Proceed for CM curves instead of refusing them.
        #[arg(long)]
        allow_cm: bool,
        /// Whether clamped Delta values enter the statistics: include or exclude.
        #[arg(long)]
        clamp_policy: Option<ClampPolicy>,
    },
}

fn run(cli: Cli) -> murmur_core::Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let clamp_flag = match &cli.command {
        Command::Satotate { clamp_policy, .. } => *clamp_policy,
        _ => None,
    };
    let cfg = Config::resolve(
        Overrides {
            cache: cli.cache,
            cutoff: cli.cutoff,
            n_max: cli.n_max,
            threads: cli.threads,
            out_dir: cli.out_dir,
            bad_prime_policy: cli.bad_prime_policy,
            clamp_policy: clamp_flag,
            strategy: cli.strategy,
        },
        file,
    )?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| murmur_core::Error::Domain(format!("cannot start worker pool: {e}")))?;
    let ctx = commands::Context::new(cfg)?;

    pool.install(|| match cli.command {
        Command::Ap { input, family, pmax, out } => ctx.ap(&input, family.as_deref(), pmax, out.as_deref()),
        Command::Zeta { q, a1, n } => ctx.zeta(q, a1, n as usize),
        Command::Murmurate { family, rank, conductor, n, imax, fit, x_axis, all_isogenous } => ctx.murmurate(
            &family,
            rank,
            &conductor,
            n as usize,
            imax as usize,
            fit,
            x_axis,
            !all_isogenous,
        ),
        Command::Satotate { input, family, n, pmax, bins, allow_cm, .. } => {
            ctx.satotate(&input, family.as_deref(), n as usize, pmax, bins as usize, allow_cm)
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("murmur: {e}");
            if e.is_domain_rejection() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
