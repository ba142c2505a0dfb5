//! Least-squares fit of `y = A x^alpha sin(B x^beta)`.
//!
//! A deterministic grid over `(alpha, B, beta)` (with `A` solved in closed
//! form at each node) seeds a Levenberg-Marquardt refinement of all four
//! parameters.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use serde::Serialize;

use super::MurmurationSeries;
use crate::Error;

const MIN_POINTS: usize = 8;
const MAX_ITERATIONS: usize = 500;

/// Which abscissa the fit (and plots) use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum XAxis {
    /// Prime index i.
    #[default]
    Index,
    /// The prime p_i itself.
    Prime,
}

impl FromStr for XAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "i" | "index" => Ok(Self::Index),
            "p" | "prime" => Ok(Self::Prime),
            other => Err(Error::Domain(format!("unknown x axis `{other}` (i, p)"))),
        }
    }
}

impl fmt::Display for XAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Index => "i",
            Self::Prime => "p",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub a: f64,
    pub alpha: f64,
    pub b: f64,
    pub beta: f64,
    pub residual_rms: f64,
    pub iterations: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum FitError {
    #[error("need at least {MIN_POINTS} points, got {0}")]
    TooFewPoints(usize),
    #[error("abscissae must be positive and finite")]
    InvalidAbscissa,
    #[error("refinement did not converge (best grid candidate: A = {}, alpha = {}, B = {}, beta = {}, rms = {})",
        best.a, best.alpha, best.b, best.beta, best.residual_rms)]
    NonConvergence { best: FitResult },
}

pub fn model(x: f64, a: f64, alpha: f64, b: f64, beta: f64) -> f64 {
    a * x.powf(alpha) * (b * x.powf(beta)).sin()
}

fn sum_sq(xs: &[f64], ys: &[f64], p: &Vector4<f64>) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = model(x, p[0], p[1], p[2], p[3]) - y;
            r * r
        })
        .sum()
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
}

/// Coarse grid: alpha in [-1, 1.5], beta in [0.05, 1.5], B log-spaced in
/// [1e-3, 10]; A by linear least squares at every node.
fn grid_search(xs: &[f64], ys: &[f64]) -> Vector4<f64> {
    let ln_x: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let alphas: Vec<f64> = linspace(-1.0, 1.5, 26).collect();
    let pow_alpha: Vec<Vec<f64>> = alphas
        .iter()
        .map(|a| ln_x.iter().map(|l| (a * l).exp()).collect())
        .collect();
    let n_b = 320;
    let bs: Vec<f64> = linspace(-3.0, 1.0, n_b).map(|e| 10f64.powf(e)).collect();
    let yy: f64 = ys.iter().map(|y| y * y).sum();

    let mut best = (f64::INFINITY, Vector4::new(0.0, 0.0, 1.0, 1.0));
    let mut sines = vec![0.0; xs.len()];
    for beta in linspace(0.05, 1.5, 30) {
        let pow_beta: Vec<f64> = ln_x.iter().map(|l| (beta * l).exp()).collect();
        for &b in &bs {
            for (s, xb) in sines.iter_mut().zip(&pow_beta) {
                *s = (b * xb).sin();
            }
            for (alpha, pa) in alphas.iter().zip(&pow_alpha) {
                let (mut yg, mut gg) = (0.0, 0.0);
                for k in 0..xs.len() {
                    let g = pa[k] * sines[k];
                    yg += ys[k] * g;
                    gg += g * g;
                }
                if gg <= 0.0 {
                    continue;
                }
                let sse = yy - yg * yg / gg;
                if sse < best.0 {
                    best = (sse, Vector4::new(yg / gg, *alpha, b, beta));
                }
            }
        }
    }
    best.1
}

fn rms(xs: &[f64], ys: &[f64], p: &Vector4<f64>) -> f64 {
    (sum_sq(xs, ys, p) / xs.len() as f64).sqrt()
}

fn result(xs: &[f64], ys: &[f64], p: &Vector4<f64>, iterations: usize) -> FitResult {
    FitResult {
        a: p[0],
        alpha: p[1],
        b: p[2],
        beta: p[3],
        residual_rms: rms(xs, ys, p),
        iterations,
    }
}

/// Fits the oscillatory model to `(xs, ys)`.
pub fn fit_model(xs: &[f64], ys: &[f64]) -> Result<FitResult, FitError> {
    assert_eq!(xs.len(), ys.len(), "abscissae and ordinates must pair up");
    if xs.len() < MIN_POINTS {
        return Err(FitError::TooFewPoints(xs.len()));
    }
    if xs.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(FitError::InvalidAbscissa);
    }
    let seed = grid_search(xs, ys);
    let yy: f64 = ys.iter().map(|y| y * y).sum();
    let mut params = seed;
    let mut cost = sum_sq(xs, ys, &params);
    let mut lambda = 1e-3;
    let mut converged = cost <= 1e-28 * yy.max(f64::MIN_POSITIVE);
    let mut iterations = 0;

    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        let (a, alpha, b, beta) = (params[0], params[1], params[2], params[3]);
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for (&x, &y) in xs.iter().zip(ys) {
            let lx = x.ln();
            let xa = x.powf(alpha);
            let xb = x.powf(beta);
            let (s, c) = (b * xb).sin_cos();
            let r = a * xa * s - y;
            let j = Vector4::new(xa * s, a * lx * xa * s, a * xa * c * xb, a * xa * c * b * xb * lx);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = jtj;
            for d in 0..4 {
                damped[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = params + step;
            let trial_cost = sum_sq(xs, ys, &trial);
            if trial_cost.is_finite() && trial_cost < cost {
                let small_step = (0..4).all(|d| step[d].abs() <= 1e-12 * (trial[d].abs() + 1e-12));
                let small_gain = cost - trial_cost <= 1e-15 * cost;
                params = trial;
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                converged = small_step || small_gain || cost <= 1e-28 * yy;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // No descent direction left at any damping: a local minimum.
            converged = true;
        }
    }

    if converged {
        Ok(result(xs, ys, &params, iterations))
    } else {
        Err(FitError::NonConvergence {
            best: result(xs, ys, &seed, 0),
        })
    }
}

/// Fits a murmuration series against i or p_i.
pub fn fit_murmuration(series: &MurmurationSeries, axis: XAxis) -> Result<FitResult, FitError> {
    let xs: Vec<f64> = series
        .points
        .iter()
        .map(|p| match axis {
            XAxis::Index => p.i as f64,
            XAxis::Prime => p.p as f64,
        })
        .collect();
    let ys: Vec<f64> = series.points.iter().map(|p| p.value).collect();
    fit_model(&xs, &ys)
}
