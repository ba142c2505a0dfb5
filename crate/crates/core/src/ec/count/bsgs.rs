//! Baby-step giant-step group order computation (Mestre style).
//!
//! Orders of random points are accumulated with lcm until exactly one
//! multiple of the exponent bound lies in the Hasse interval. If that never
//! happens the quadratic twist is used to disambiguate, and as a last resort
//! the count falls back to enumeration. Random points come from a generator
//! seeded by the curve itself, so the result never depends on run-to-run
//! state.

use std::collections::HashMap;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::naive::NaiveCounter;
use super::{hasse_interval, PointCount, PointCounter};
use crate::ec::field::{self, isqrt};
use crate::ec::ReducedCurve;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Point {
    Infinity,
    Affine(u64, u64),
}

/// `y^2 = x^3 + a x + b` over F_p, p >= 5.
#[derive(Clone, Copy, Debug)]
struct ShortCurve {
    a: u64,
    b: u64,
    p: u64,
}

impl ShortCurve {
    fn rhs(&self, x: u64) -> u64 {
        let p = self.p;
        field::add(
            field::mul(field::add(field::mul(x, x, p), self.a, p), x, p),
            self.b,
            p,
        )
    }

    fn add(&self, lhs: Point, rhs: Point) -> Point {
        let p = self.p;
        let (x1, y1, x2, y2) = match (lhs, rhs) {
            (Point::Infinity, q) | (q, Point::Infinity) => return q,
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            if field::add(y1, y2, p) == 0 {
                return Point::Infinity;
            }
            let num = field::add(field::mul(3, field::mul(x1, x1, p), p), self.a, p);
            field::mul(num, field::inv(field::add(y1, y1, p), p), p)
        } else {
            field::mul(
                field::sub(y2, y1, p),
                field::inv(field::sub(x2, x1, p), p),
                p,
            )
        };
        let x3 = field::sub(field::sub(field::mul(lambda, lambda, p), x1, p), x2, p);
        let y3 = field::sub(field::mul(lambda, field::sub(x1, x3, p), p), y1, p);
        Point::Affine(x3, y3)
    }

    fn mul(&self, point: Point, mut k: u64) -> Point {
        let mut acc = Point::Infinity;
        let mut base = point;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> Point {
        loop {
            let x = rng.gen_range(0..self.p);
            let r = self.rhs(x);
            if let Some(y) = field::sqrt(r, self.p) {
                let y = if rng.gen::<bool>() { y } else { field::neg(y, self.p) };
                return Point::Affine(x, y);
            }
        }
    }

    fn twist(&self) -> ShortCurve {
        let p = self.p;
        let d = field::non_residue(p);
        let d2 = field::mul(d, d, p);
        ShortCurve {
            a: field::mul(self.a, d2, p),
            b: field::mul(self.b, field::mul(d2, d, p), p),
            p,
        }
    }

    /// Some multiple of the order of `point` inside `[lo, hi]`, found by
    /// baby-step giant-step with steps of size `2m + 1`.
    fn multiple_in_interval(&self, point: Point, lo: u64, hi: u64) -> Option<u64> {
        let m = isqrt(hi - lo) + 1;
        let mut baby: HashMap<u64, (u64, u64)> = HashMap::with_capacity(m as usize);
        let mut r = Point::Infinity;
        for j in 1..=m {
            r = self.add(r, point);
            match r {
                Point::Infinity => return Some(j),
                Point::Affine(x, y) => {
                    baby.entry(x).or_insert((j, y));
                }
            }
        }
        let stride = 2 * m + 1;
        let step = self.mul(point, stride);
        let mut centre = lo + m;
        let mut giant = self.mul(point, centre);
        while centre <= hi + m {
            match giant {
                Point::Infinity => return Some(centre),
                Point::Affine(x, y) => {
                    if let Some(&(j, yj)) = baby.get(&x) {
                        // giant = j P  => (centre - j) P = O, else giant = -j P.
                        return Some(if yj == y { centre - j } else { centre + j });
                    }
                }
            }
            giant = self.add(giant, step);
            centre += stride;
        }
        None
    }

    fn order(&self, point: Point, lo: u64, hi: u64) -> Option<u64> {
        let mut order = self.multiple_in_interval(point, lo, hi)?;
        for ell in prime_factors(order) {
            while order % ell == 0 && self.mul(point, order / ell) == Point::Infinity {
                order /= ell;
            }
        }
        Some(order)
    }

    /// lcm of point orders, stopping early once it pins a unique multiple in
    /// the interval.
    fn exponent_bound(&self, lo: u64, hi: u64, rng: &mut ChaCha8Rng, tries: usize) -> Option<u64> {
        let mut l = 1u64;
        for _ in 0..tries {
            let pt = self.random_point(rng);
            l = l.lcm(&self.order(pt, lo, hi)?);
            if multiples_in(l, lo, hi) == 1 {
                break;
            }
        }
        Some(l)
    }
}

fn multiples_in(l: u64, lo: u64, hi: u64) -> u64 {
    hi / l - (lo - 1) / l
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Baby-step giant-step counter with twist and enumeration fallbacks.
#[derive(Clone, Copy, Debug)]
pub struct BsgsCounter {
    /// Random points tried per curve (and per twist) before giving up.
    pub max_points: usize,
}

impl Default for BsgsCounter {
    fn default() -> Self {
        Self { max_points: 12 }
    }
}

impl BsgsCounter {
    /// Group order of a good reduction at p >= 5, or `AmbiguousOrder` when
    /// neither the curve nor its twist pins it down.
    pub fn group_order(&self, rc: &ReducedCurve) -> Result<u64> {
        if !rc.good {
            return Err(Error::BadReduction { p: rc.p });
        }
        let p = rc.p;
        if p < 5 {
            return Err(Error::AmbiguousOrder { p });
        }
        let (a, b) = rc.short_form();
        let curve = ShortCurve { a, b, p };
        let seed = p ^ a.rotate_left(21) ^ b.rotate_left(42);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = hasse_interval(p);
        let ambiguous = Error::AmbiguousOrder { p };

        let l = curve
            .exponent_bound(lo, hi, &mut rng, self.max_points)
            .ok_or(Error::AmbiguousOrder { p })?;
        if multiples_in(l, lo, hi) == 1 {
            return Ok(hi / l * l);
        }

        // #E + #E' = 2p + 2, and the Hasse interval is symmetric about p + 1.
        let twist = curve.twist();
        let lt = twist
            .exponent_bound(lo, hi, &mut rng, self.max_points)
            .ok_or(Error::AmbiguousOrder { p })?;
        let first = lo.div_ceil(l) * l;
        let mut found = None;
        for n in (first..=hi).step_by(l as usize) {
            if (2 * p + 2 - n).is_multiple_of(lt) {
                if found.is_some() {
                    return Err(ambiguous);
                }
                found = Some(n);
            }
        }
        found.ok_or(ambiguous)
    }
}

impl PointCounter for BsgsCounter {
    fn name(&self) -> &'static str {
        "bsgs"
    }

    fn count_points(&self, rc: &ReducedCurve) -> Result<PointCount> {
        if !rc.good {
            return Err(Error::BadReduction { p: rc.p });
        }
        if rc.p <= 3 {
            return NaiveCounter.count_points(rc);
        }
        match self.group_order(rc) {
            Ok(n) => PointCount::new(rc.p, n),
            Err(Error::AmbiguousOrder { .. }) => NaiveCounter.count_points(rc),
            Err(e) => Err(e),
        }
    }
}
