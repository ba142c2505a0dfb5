//! Rank-n zeta functions of elliptic curves over F_q, driven entirely by the
//! beta invariants.
//!
//! For fixed `(q, a1)` the betas obey
//!
//! ```text
//! (q^n - 1) b_n = (q^n + q^(n-1) - a1) b_(n-1) - (q^(n-1) - q) b_(n-2),   b_0 = 1, b_(-1) = 0
//! ```
//!
//! and the rank-n zeta function is `b_(n-1) + b_n (Q-1)T / ((1-T)(1-QT))`
//! with `Q = q^n`, i.e. `P_n(T) = b_(n-1) (1 - a_n T + Q T^2)` where
//! `a_n = (Q+1) - (Q-1) b_n / b_(n-1)`.
//!
//! Everything up to `a_n` and `P_n` is exact; floats appear only in the
//! angle and big-Delta normalisations and in complex evaluation.

use std::f64::consts::FRAC_PI_2;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::{Error, Result};

/// Default highest rank computed when callers do not ask for one.
pub const DEFAULT_N_MAX: usize = 16;

/// Pole tolerance for `|1 - T|` and `|1 - QT|`.
const POLE_EPS: f64 = 1e-12;

/// `beta_(-1) .. beta_(n_max)` for one `(q, a1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaSequence {
    q: BigInt,
    a1: BigInt,
    // betas[k] holds beta_(k-1)
    betas: Vec<BigRational>,
}

fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

impl BetaSequence {
    /// Runs the recursion up to `n_max` and asserts every `beta_n > 0`
    /// (they are masses, so a non-positive value means `a1` is not a trace
    /// of Frobenius for this q).
    pub fn new(q: impl Into<BigInt>, a1: impl Into<BigInt>, n_max: usize) -> Result<Self> {
        let bs = Self::new_unchecked(q, a1, n_max)?;
        for (k, b) in bs.betas.iter().enumerate().skip(1) {
            if !b.is_positive() {
                return Err(Error::NonPositiveBeta {
                    index: k - 1,
                    value: b.to_string(),
                    q: bs.q.clone(),
                    a1: bs.a1.clone(),
                });
            }
        }
        Ok(bs)
    }

    /// Same recursion without the positivity assertion, for probing
    /// invariants with inputs that are not Frobenius traces.
    pub fn new_unchecked(q: impl Into<BigInt>, a1: impl Into<BigInt>, n_max: usize) -> Result<Self> {
        let q = q.into();
        let a1 = a1.into();
        if q < BigInt::from(2) {
            return Err(Error::InvalidFieldSize(q));
        }
        let mut betas = Vec::with_capacity(n_max + 2);
        betas.push(BigRational::zero());
        betas.push(BigRational::one());
        let mut q_prev = BigInt::one(); // q^(n-1)
        for n in 1..=n_max {
            let q_n = &q_prev * &q;
            let lead = rat(&q_n + &q_prev - &a1);
            let lag = rat(&q_prev - &q);
            let rhs = lead * &betas[n] - lag * &betas[n - 1];
            betas.push(rhs / rat(&q_n - 1));
            q_prev = q_n;
        }
        Ok(Self { q, a1, betas })
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn a1(&self) -> &BigInt {
        &self.a1
    }

    pub fn n_max(&self) -> usize {
        self.betas.len() - 2
    }

    /// `beta_n` for `-1 <= n <= n_max`.
    pub fn beta(&self, n: isize) -> Option<&BigRational> {
        usize::try_from(n + 1).ok().and_then(|k| self.betas.get(k))
    }

    /// `beta_0 .. beta_(n_max)`.
    pub fn betas(&self) -> &[BigRational] {
        &self.betas[1..]
    }

    fn beta_at(&self, n: usize) -> Result<&BigRational> {
        self.betas.get(n + 1).ok_or(Error::IndexOutOfRange {
            index: n,
            max: self.n_max(),
        })
    }

    fn check_rank(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_max() {
            return Err(Error::IndexOutOfRange {
                index: n,
                max: self.n_max(),
            });
        }
        Ok(())
    }

    /// `q^n` as an exact integer.
    pub fn big_q(&self, n: usize) -> BigInt {
        Pow::pow(&self.q, n)
    }

    /// Left side minus right side of the recursion at level n; zero for a
    /// correctly built sequence.
    pub fn recursion_residual(&self, n: usize) -> Result<BigRational> {
        self.check_rank(n)?;
        let q_n = self.big_q(n);
        let q_prev = self.big_q(n - 1);
        let b = |k: isize| self.beta(k).expect("in range");
        let n = n as isize;
        Ok(rat(&q_n - 1) * b(n) - rat(&q_n + &q_prev - &self.a1) * b(n - 1)
            + rat(&q_prev - &self.q) * b(n - 2))
    }

    /// Rank-n a-invariant `(Q+1) - (Q-1) beta_n / beta_(n-1)`.
    pub fn a_rank_n(&self, n: usize) -> Result<BigRational> {
        self.check_rank(n)?;
        let prev = self.beta_at(n - 1)?;
        if prev.is_zero() {
            return Err(Error::Domain(format!("beta_{} vanishes", n - 1)));
        }
        let big_q = self.big_q(n);
        Ok(rat(&big_q + 1) - rat(&big_q - 1) * self.beta_at(n)? / prev)
    }

    /// `alpha_n(0)`, which equals `beta_(n-1)` for elliptic curves.
    pub fn counting_miracle_alpha(&self, n: usize) -> Result<BigRational> {
        if n == 0 {
            return Err(Error::IndexOutOfRange {
                index: 0,
                max: self.n_max() + 1,
            });
        }
        self.beta_at(n - 1).cloned()
    }

    pub fn zeta_polynomial(&self, n: usize) -> Result<RankInvariants> {
        let a_n = self.a_rank_n(n)?;
        let alpha_n = self.counting_miracle_alpha(n)?;
        let big_q = self.big_q(n);
        let p_coeffs = [
            alpha_n.clone(),
            -(&alpha_n * &a_n),
            &alpha_n * rat(big_q.clone()),
        ];
        Ok(RankInvariants {
            n,
            q: self.q.clone(),
            big_q,
            a_n,
            alpha_n,
            p_coeffs,
        })
    }

    /// `zeta_n` as a function of `T = Q^(-s)`, evaluated in the
    /// `beta_(n-1) + beta_n (Q-1)T/((1-T)(1-QT))` form.
    pub fn zeta_eval(&self, n: usize, t: Complex64) -> Result<Complex64> {
        self.check_rank(n)?;
        let big_q = self.big_q(n).to_f64().unwrap_or(f64::INFINITY);
        check_poles(t, big_q)?;
        let prev = to_f64(self.beta_at(n - 1)?);
        let cur = to_f64(self.beta_at(n)?);
        let one = Complex64::new(1.0, 0.0);
        Ok(prev + cur * (big_q - 1.0) * t / ((one - t) * (one - big_q * t)))
    }

    /// `zeta_n(s)` with `T = Q^(-s)`.
    pub fn zeta_at_s(&self, n: usize, s: Complex64) -> Result<Complex64> {
        self.check_rank(n)?;
        self.zeta_eval(n, t_of_s(&self.q, n, s))
    }

    /// Largest relative deviation `|zeta(1-s) - zeta(s)| / scale` over the
    /// samples, where scale is the larger of the two moduli and
    /// `beta_(n-1)`.
    pub fn functional_equation_check(&self, n: usize, samples: &[Complex64]) -> Result<f64> {
        self.check_rank(n)?;
        let floor = to_f64(self.beta_at(n - 1)?).abs();
        let mut worst = 0.0f64;
        for &s in samples {
            let lhs = self.zeta_at_s(n, Complex64::new(1.0, 0.0) - s)?;
            let rhs = self.zeta_at_s(n, s)?;
            let scale = lhs.norm().max(rhs.norm()).max(floor);
            worst = worst.max((lhs - rhs).norm() / scale);
        }
        Ok(worst)
    }
}

/// `T = Q^(-s) = exp(-s n ln q)`.
pub fn t_of_s(q: &BigInt, n: usize, s: Complex64) -> Complex64 {
    let ln_q = q.to_f64().expect("finite q").ln();
    (-s * (n as f64 * ln_q)).exp()
}

fn check_poles(t: Complex64, big_q: f64) -> Result<()> {
    let one = Complex64::new(1.0, 0.0);
    if (one - t).norm() < POLE_EPS || (one - big_q * t).norm() < POLE_EPS {
        return Err(Error::Pole(format!("{t}")));
    }
    Ok(())
}

/// Nearest f64 of an exact rational.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact data of the rank-n zeta polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct RankInvariants {
    pub n: usize,
    pub q: BigInt,
    /// `Q = q^n`.
    pub big_q: BigInt,
    pub a_n: BigRational,
    /// `alpha_n(0) = beta_(n-1)`.
    pub alpha_n: BigRational,
    /// Constant, linear and quadratic coefficients of `P_n(T)`.
    pub p_coeffs: [BigRational; 3],
}

impl RankInvariants {
    /// Riemann hypothesis for `P_n`: `a_n^2 <= 4Q`, exactly.
    pub fn rh_check(&self) -> bool {
        &self.a_n * &self.a_n <= rat(4 * &self.big_q)
    }

    /// `P_n(T) / ((1-T)(1-QT))`.
    pub fn zeta_eval_rational(&self, t: Complex64) -> Result<Complex64> {
        let big_q = to_f64(&rat(self.big_q.clone()));
        check_poles(t, big_q)?;
        let [c0, c1, c2] = self.p_coeffs.each_ref().map(to_f64);
        let one = Complex64::new(1.0, 0.0);
        Ok((c0 + c1 * t + c2 * t * t) / ((one - t) * (one - big_q * t)))
    }

    /// `a_n / (2 sqrt Q)`, the cosine of the rank-n argument.
    pub fn normalized_trace(&self) -> f64 {
        let sqrt_q = self.q.to_f64().expect("finite q").sqrt();
        to_f64(&self.a_n) / (2.0 * sqrt_q.powi(self.n as i32))
    }

    /// Rank-n argument `arccos(a_n / (2 sqrt Q))`, clamping the argument to
    /// [-1, 1] and flagging when that was needed.
    pub fn theta_n(&self) -> AngleData {
        let ratio = self.normalized_trace();
        let clamped = !(-1.0..=1.0).contains(&ratio);
        AngleData {
            ratio,
            theta: ratio.clamp(-1.0, 1.0).acos(),
            delta: None,
            clamped,
        }
    }

    /// Big-Delta invariant for n >= 2:
    ///
    /// * n = 2: `sqrt(q) cos(theta_2) + (sqrt(q) - 1/sqrt(q)) / 2`
    /// * n >= 3: `sqrt(q^(n-1))/(n-1) (pi/2 - theta_n) + (sqrt(q) + (n-5)/((n-1) sqrt q)) / 2`
    ///
    /// `pi/2 - theta_n` is evaluated as `arcsin` of the normalised trace,
    /// which avoids cancellation when theta_n is close to pi/2.
    pub fn delta_n(&self, angle: &AngleData) -> Result<AngleData> {
        let sqrt_q = self.q.to_f64().expect("finite q").sqrt();
        let delta = match self.n {
            0 | 1 => {
                return Err(Error::Domain(
                    "big Delta is only defined for n >= 2".to_string(),
                ))
            }
            2 => sqrt_q * angle.ratio + 0.5 * (sqrt_q - 1.0 / sqrt_q),
            n => {
                let m = (n - 1) as f64;
                let scale = sqrt_q.powi(n as i32 - 1) / m;
                let shift = 0.5 * (sqrt_q + (n as f64 - 5.0) / (m * sqrt_q));
                let offset = if angle.clamped {
                    FRAC_PI_2 - angle.theta
                } else {
                    angle.ratio.asin()
                };
                scale * offset + shift
            }
        };
        Ok(AngleData {
            delta: Some(delta),
            clamped: angle.clamped || !(-1.0..=1.0).contains(&delta),
            ..*angle
        })
    }

    /// `theta_n` followed by `delta_n` (the latter only when n >= 2).
    pub fn angles(&self) -> AngleData {
        let angle = self.theta_n();
        if self.n >= 2 {
            self.delta_n(&angle).expect("n >= 2")
        } else {
            angle
        }
    }
}

/// Float-side normalisations of a rank-n zeta polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AngleData {
    /// `a_n / (2 sqrt Q)` before clamping.
    pub ratio: f64,
    /// `theta_n` in `[0, pi]`.
    pub theta: f64,
    pub delta: Option<f64>,
    /// Set when the arccos argument or Delta fell outside [-1, 1].
    pub clamped: bool,
}

/// Leading behaviour of `a_n` in q:
/// `a1` (n = 1), `1 + a1 - q` (n = 2), `(5-n) + (n-1) a1 - (n-1) q` (n >= 3).
pub fn asymptotic_main_term(q: &BigInt, a1: &BigInt, n: usize) -> BigInt {
    match n {
        0 => panic!("rank must be at least 1"),
        1 => a1.clone(),
        2 => 1 + a1 - q,
        n => {
            let m = BigInt::from(n - 1);
            BigInt::from(5 - n as i64) + &m * a1 - &m * q
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn hand_unrolled_betas() {
        let bs = BetaSequence::new(3, 0, 3).unwrap();
        assert_eq!(bs.beta(-1), Some(&r(0, 1)));
        assert_eq!(bs.beta(0), Some(&r(1, 1)));
        assert_eq!(bs.beta(1), Some(&r(2, 1)));
        assert_eq!(bs.beta(2), Some(&r(3, 1)));
        assert_eq!(bs.beta(3), Some(&r(48, 13)));
        assert_eq!(bs.beta(4), None);

        let bs = BetaSequence::new(5, -2, 2).unwrap();
        assert_eq!(bs.beta(1), Some(&r(2, 1)));
        assert_eq!(bs.beta(2), Some(&r(8, 3)));

        let bs = BetaSequence::new(7, 3, 0).unwrap();
        assert_eq!(bs.betas(), &[r(1, 1)]);
        assert_eq!(bs.n_max(), 0);
    }

    #[test]
    fn rejects_small_q() {
        assert!(matches!(BetaSequence::new(1, 0, 3), Err(Error::InvalidFieldSize(_))));
        assert!(matches!(BetaSequence::new(-5, 0, 3), Err(Error::InvalidFieldSize(_))));
    }

    #[test]
    fn positivity_is_asserted() {
        // a1 = 5 at q = 2 breaks the Hasse bound and makes beta_1 = -2.
        assert!(matches!(
            BetaSequence::new(2, 5, 1),
            Err(Error::NonPositiveBeta { index: 1, .. })
        ));
        assert!(BetaSequence::new_unchecked(2, 5, 1).is_ok());
    }

    #[test]
    fn a_invariants() {
        let bs = BetaSequence::new(3, 0, 3).unwrap();
        assert_eq!(bs.a_rank_n(1).unwrap(), r(0, 1));
        assert_eq!(bs.a_rank_n(2).unwrap(), r(-2, 1));
        assert_eq!(bs.a_rank_n(3).unwrap(), r(-4, 1));
        assert!(matches!(bs.a_rank_n(4), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(bs.a_rank_n(0), Err(Error::IndexOutOfRange { .. })));
        let bs = BetaSequence::new(101, 10, 2).unwrap();
        assert_eq!(bs.a_rank_n(2).unwrap(), r(-90, 1));
    }

    #[test]
    fn counting_miracle() {
        let bs = BetaSequence::new(3, 0, 3).unwrap();
        assert_eq!(bs.counting_miracle_alpha(2).unwrap(), r(2, 1));
        assert_eq!(bs.counting_miracle_alpha(1).unwrap(), r(1, 1));
        let bs = BetaSequence::new(5, -2, 2).unwrap();
        assert_eq!(bs.counting_miracle_alpha(3).unwrap(), r(8, 3));
        assert!(bs.counting_miracle_alpha(4).is_err());
    }

    #[test]
    fn zeta_polynomials() {
        let p = BetaSequence::new(3, 0, 3).unwrap().zeta_polynomial(2).unwrap();
        assert_eq!(p.p_coeffs, [r(2, 1), r(4, 1), r(18, 1)]);
        let p = BetaSequence::new(5, -2, 2).unwrap().zeta_polynomial(2).unwrap();
        assert_eq!(p.p_coeffs, [r(2, 1), r(12, 1), r(50, 1)]);
        let p = BetaSequence::new(13, 4, 1).unwrap().zeta_polynomial(1).unwrap();
        assert_eq!(p.p_coeffs, [r(1, 1), r(-4, 1), r(13, 1)]);
    }

    #[test]
    fn zeta_values() {
        let bs = BetaSequence::new(3, 0, 3).unwrap();
        let z = bs.zeta_eval(1, Complex64::new(-1.0, 0.0)).unwrap();
        assert!((z - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let z = bs.zeta_eval(3, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(z.re, 3.0);
        // T = 1/3 for n = 2 (Q = 9, QT = 3): both forms agree.
        let t = Complex64::new(1.0 / 3.0, 0.0);
        let a = bs.zeta_eval(2, t).unwrap();
        let b = bs.zeta_polynomial(2).unwrap().zeta_eval_rational(t).unwrap();
        assert!((a - b).norm() <= 1e-12 * a.norm());
        assert!(matches!(bs.zeta_eval(2, Complex64::new(1.0, 0.0)), Err(Error::Pole(_))));
        assert!(matches!(bs.zeta_eval(2, Complex64::new(1.0 / 9.0, 0.0)), Err(Error::Pole(_))));
    }

    #[test]
    fn rh_examples() {
        let ri = BetaSequence::new(3, 0, 3).unwrap().zeta_polynomial(3).unwrap();
        assert!(ri.rh_check());
        let forged = BetaSequence::new_unchecked(2, 5, 1).unwrap().zeta_polynomial(1).unwrap();
        assert!(!forged.rh_check());
        let ri = BetaSequence::new(101, 10, 2).unwrap().zeta_polynomial(2).unwrap();
        assert!(ri.rh_check());
    }

    #[test]
    fn functional_equation_examples() {
        let bs = BetaSequence::new(3, 0, 2).unwrap();
        let half = Complex64::new(0.5, 0.0);
        assert_eq!(bs.functional_equation_check(2, &[half]).unwrap(), 0.0);
        assert!(bs.functional_equation_check(2, &[Complex64::new(2.0, 0.0)]).unwrap() <= 1e-9);
        let bs = BetaSequence::new(5, -2, 3).unwrap();
        assert!(bs.functional_equation_check(3, &[Complex64::new(0.7, 1.3)]).unwrap() <= 1e-9);
    }

    #[test]
    fn angles() {
        let ri = BetaSequence::new(5, -2, 1).unwrap().zeta_polynomial(1).unwrap();
        assert!((ri.theta_n().theta - 2.034_443_935_795_703).abs() < 1e-9);
        assert!(ri.delta_n(&ri.theta_n()).is_err());

        let ri = BetaSequence::new(3, 0, 3).unwrap().zeta_polynomial(3).unwrap();
        let a = ri.theta_n();
        assert!((a.theta - 1.965_895_994_081_286).abs() < 1e-12);
        let d = ri.delta_n(&a).unwrap().delta.unwrap();
        assert!((d - (-0.015_299_231_739_958)).abs() < 1e-12, "{d}");

        let ri = BetaSequence::new(5, -2, 2).unwrap().zeta_polynomial(2).unwrap();
        let d = ri.angles().delta.unwrap();
        assert!((d + 1.0 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn main_terms() {
        let b = |v: i64| BigInt::from(v);
        assert_eq!(asymptotic_main_term(&b(3), &b(0), 3), b(-4));
        assert_eq!(asymptotic_main_term(&b(101), &b(10), 3), b(-180));
        assert_eq!(asymptotic_main_term(&b(101), &b(10), 2), b(-90));
        assert_eq!(asymptotic_main_term(&b(101), &b(10), 1), b(10));
    }
}
