use super::{PointCount, PointCounter};
use crate::ec::{field, ReducedCurve};
use crate::{Error, Result};

/// Above this size quadratic characters come from Euler's criterion instead
/// of a lookup table.
const SQUARE_TABLE_LIMIT: u64 = 1 << 26;

/// Counts points by running over every x (and every y when p = 2).
#[derive(Clone, Copy, Debug, Default)]
pub struct NaiveCounter;

impl PointCounter for NaiveCounter {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn count_points(&self, rc: &ReducedCurve) -> Result<PointCount> {
        if !rc.good {
            return Err(Error::BadReduction { p: rc.p });
        }
        let n = if rc.p == 2 {
            enumerate_pairs(rc)
        } else {
            count_by_characters(rc)
        };
        PointCount::new(rc.p, n)
    }
}

fn enumerate_pairs(rc: &ReducedCurve) -> u64 {
    let p = rc.p;
    let [a1, a2, a3, a4, a6] = rc.coeffs;
    let mut n = 1;
    for x in 0..p {
        for y in 0..p {
            let lhs = (y * y + a1 * x * y + a3 * y) % p;
            let rhs = (x * x * x + a2 * x * x + a4 * x + a6) % p;
            if lhs == rhs {
                n += 1;
            }
        }
    }
    n
}

/// For odd p, `(2y + a1 x + a3)^2 = 4(x^3 + a2 x^2 + a4 x + a6) + (a1 x + a3)^2`
/// and y -> 2y + a1 x + a3 is a bijection, so each x contributes
/// `1 + chi(D(x))` points.
fn count_by_characters(rc: &ReducedCurve) -> u64 {
    let p = rc.p;
    let [a1, a2, a3, a4, a6] = rc.coeffs;
    let table = (p <= SQUARE_TABLE_LIMIT).then(|| {
        let mut is_sq = vec![false; p as usize];
        for y in 0..=(p / 2) {
            is_sq[field::mul(y, y, p) as usize] = true;
        }
        is_sq
    });
    let four = 4 % p;
    let mut n: u64 = 1;
    for x in 0..p {
        let cubic = field::add(
            field::mul(field::add(field::mul(field::add(x, a2, p), x, p), a4, p), x, p),
            a6,
            p,
        );
        let lin = field::add(field::mul(a1, x, p), a3, p);
        let d = field::add(field::mul(four, cubic, p), field::mul(lin, lin, p), p);
        n += if d == 0 {
            1
        } else {
            let square = match &table {
                Some(t) => t[d as usize],
                None => field::legendre(d, p) == 1,
            };
            if square {
                2
            } else {
                0
            }
        };
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Literal enumeration of all (x, y) over F_p.
    fn brute(rc: &ReducedCurve) -> u64 {
        enumerate_pairs(rc)
    }

    #[test]
    fn worked_examples() {
        let c = |p, a| NaiveCounter.count_points(&ReducedCurve::new(p, a)).unwrap();
        let e = c(3, [0, 0, 0, 1, 0]);
        assert_eq!((e.n_points, e.trace), (4, 0));
        let e = c(5, [0, 0, 0, 4, 0]);
        assert_eq!((e.n_points, e.trace), (8, -2));
        let e = c(2, [0, 0, 1, 1, 0]);
        assert_eq!((e.n_points, e.trace), (5, -2));
    }

    #[test]
    fn character_sum_matches_enumeration() {
        for p in [3u64, 5, 7, 11, 13, 29, 31] {
            for seed in 0..40u64 {
                let coeffs = [seed % p, seed * 7 % p, seed * 3 % p, (seed * 11 + 1) % p, (seed * 5 + 2) % p];
                let rc = ReducedCurve::new(p, coeffs);
                if rc.good {
                    assert_eq!(count_by_characters(&rc), brute(&rc), "p = {p}, {coeffs:?}");
                }
            }
        }
    }

    #[test]
    fn bad_reduction_rejected() {
        let rc = ReducedCurve::new(5, [0, 0, 0, 0, 0]);
        assert!(matches!(
            NaiveCounter.count_points(&rc),
            Err(Error::BadReduction { p: 5 })
        ));
    }
}
