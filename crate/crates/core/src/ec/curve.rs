use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::field;
use crate::{Error, Result};

/// The thirteen j-invariants of elliptic curves over Q with complex
/// multiplication.
const CM_J_INVARIANTS: [i64; 13] = [
    0,
    1728,
    -3375,
    8000,
    -32768,
    54000,
    287496,
    -884736,
    -12288000,
    16581375,
    -884736000,
    -147197952000,
    -262537412640768000,
];

/// Integral Weierstrass model `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`
/// together with optional database metadata.
///
/// Models are assumed minimal; no minimisation is performed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveOverQ {
    pub ainvs: [BigInt; 5],
    pub label: Option<String>,
    pub conductor: Option<BigInt>,
    pub arithmetic_rank: Option<u32>,
    pub cm_flag: Option<bool>,
}

#[derive(Clone, Debug)]
struct BInvariants {
    b2: BigInt,
    b4: BigInt,
    b6: BigInt,
    b8: BigInt,
}

impl CurveOverQ {
    /// Builds a curve from its a-invariants, rejecting singular models.
    pub fn new(ainvs: [BigInt; 5]) -> Result<Self> {
        let curve = Self {
            ainvs,
            label: None,
            conductor: None,
            arithmetic_rank: None,
            cm_flag: None,
        };
        if curve.discriminant().is_zero() {
            return Err(Error::SingularModel);
        }
        Ok(curve)
    }

    pub fn from_i64(ainvs: [i64; 5]) -> Result<Self> {
        Self::new(ainvs.map(BigInt::from))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_conductor(mut self, conductor: impl Into<BigInt>) -> Self {
        self.conductor = Some(conductor.into());
        self
    }

    pub fn with_rank(mut self, rank: u32) -> Self {
        self.arithmetic_rank = Some(rank);
        self
    }

    pub fn with_cm_flag(mut self, cm: bool) -> Self {
        self.cm_flag = Some(cm);
        self
    }

    /// Label if known, otherwise the bracketed a-invariants.
    pub fn display_label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.ainvs_string())
    }

    pub fn ainvs_string(&self) -> String {
        let parts: Vec<String> = self.ainvs.iter().map(|a| a.to_string()).collect();
        format!("[{}]", parts.join(","))
    }

    fn b_invariants(&self) -> BInvariants {
        let [a1, a2, a3, a4, a6] = &self.ainvs;
        let b2 = a1 * a1 + 4 * a2;
        let b4 = 2 * a4 + a1 * a3;
        let b6 = a3 * a3 + 4 * a6;
        let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
        BInvariants { b2, b4, b6, b8 }
    }

    pub fn c4(&self) -> BigInt {
        let b = self.b_invariants();
        &b.b2 * &b.b2 - 24 * &b.b4
    }

    pub fn c6(&self) -> BigInt {
        let b = self.b_invariants();
        -(&b.b2 * &b.b2 * &b.b2) + 36 * &b.b2 * &b.b4 - 216 * &b.b6
    }

    /// Discriminant of this model; zero means the model is singular.
    pub fn discriminant(&self) -> BigInt {
        let BInvariants { b2, b4, b6, b8 } = self.b_invariants();
        -(&b2 * &b2 * &b8) - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6
    }

    pub fn j_invariant(&self) -> Result<BigRational> {
        let disc = self.discriminant();
        if disc.is_zero() {
            return Err(Error::SingularModel);
        }
        let c4 = self.c4();
        Ok(BigRational::new(&c4 * &c4 * &c4, disc))
    }

    /// CM detection from the j-invariant; an explicit `cm_flag` wins.
    pub fn is_cm(&self) -> Result<bool> {
        let j = self.j_invariant()?;
        if let Some(flag) = self.cm_flag {
            return Ok(flag);
        }
        Ok(j.is_integer() && CM_J_INVARIANTS.iter().any(|&c| *j.numer() == BigInt::from(c)))
    }

    /// Reduction modulo a prime. Goodness follows the conductor when it is
    /// known; a model that is singular mod p is never marked good.
    pub fn reduce(&self, p: u64) -> ReducedCurve {
        debug_assert!(field::is_prime(p), "{p} is not prime");
        let big_p = BigInt::from(p);
        let coeffs = self.ainvs.clone().map(|a| {
            a.mod_floor(&big_p)
                .to_u64()
                .expect("residue fits in a word")
        });
        let singular_mod_p = self.discriminant().mod_floor(&big_p).is_zero();
        let good = match &self.conductor {
            Some(n) => !n.mod_floor(&big_p).is_zero() && !singular_mod_p,
            None => !singular_mod_p,
        };
        ReducedCurve { p, coeffs, good }
    }
}

impl fmt::Display for CurveOverQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_label())
    }
}

/// Parses `a1,a2,a3,a4,a6`, optionally wrapped in brackets.
impl FromStr for CurveOverQ {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('[').trim_end_matches(']');
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(Error::Parse {
                line: 0,
                message: format!("expected five a-invariants, got `{s}`"),
            });
        }
        let mut ainvs: [BigInt; 5] = Default::default();
        for (slot, part) in ainvs.iter_mut().zip(&parts) {
            *slot = part.parse().map_err(|_| Error::Parse {
                line: 0,
                message: format!("`{part}` is not an integer"),
            })?;
        }
        Self::new(ainvs)
    }
}

/// A Weierstrass model over F_p in general form, so p = 2 and 3 need no
/// special treatment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ReducedCurve {
    pub p: u64,
    pub coeffs: [u64; 5],
    pub good: bool,
}

impl ReducedCurve {
    /// Curve over F_p from residues; `good` is set from the mod-p
    /// discriminant.
    pub fn new(p: u64, coeffs: [u64; 5]) -> Self {
        let coeffs = coeffs.map(|c| c % p);
        let mut rc = Self {
            p,
            coeffs,
            good: true,
        };
        rc.good = rc.discriminant() != 0;
        rc
    }

    /// Discriminant reduced mod p.
    pub fn discriminant(&self) -> u64 {
        let p = self.p;
        let [a1, a2, a3, a4, a6] = self.coeffs;
        let m = |a, b| field::mul(a, b, p);
        let ad = |a, b| field::add(a, b, p);
        let sb = |a, b| field::sub(a, b, p);
        let k = |c: u64| c % p;
        let b2 = ad(m(a1, a1), m(k(4), a2));
        let b4 = ad(m(k(2), a4), m(a1, a3));
        let b6 = ad(m(a3, a3), m(k(4), a6));
        let b8 = sb(
            ad(ad(m(m(a1, a1), a6), m(m(k(4), a2), a6)), m(a2, m(a3, a3))),
            ad(m(m(a1, a3), a4), m(a4, a4)),
        );
        let t1 = m(m(b2, b2), b8);
        let t2 = m(k(8), m(b4, m(b4, b4)));
        let t3 = m(k(27), m(b6, b6));
        let t4 = m(k(9), m(b2, m(b4, b6)));
        sb(t4, ad(ad(t1, t2), t3))
    }

    /// Short Weierstrass coefficients (A, B) of `y^2 = x^3 + A x + B`
    /// isomorphic to this curve. Only defined for p >= 5.
    pub fn short_form(&self) -> (u64, u64) {
        let p = self.p;
        assert!(p >= 5, "short form needs p >= 5");
        let [a1, a2, a3, a4, a6] = self.coeffs;
        let m = |a, b| field::mul(a, b, p);
        let ad = |a, b| field::add(a, b, p);
        let sb = |a, b| field::sub(a, b, p);
        let k = |c: u64| c % p;
        let b2 = ad(m(a1, a1), m(k(4), a2));
        let b4 = ad(m(k(2), a4), m(a1, a3));
        let b6 = ad(m(a3, a3), m(k(4), a6));
        let c4 = sb(m(b2, b2), m(k(24), b4));
        let c6 = sb(m(k(36), m(b2, b4)), ad(m(b2, m(b2, b2)), m(k(216), b6)));
        (field::neg(m(k(27), c4), p), field::neg(m(k(54), c6), p))
    }
}
