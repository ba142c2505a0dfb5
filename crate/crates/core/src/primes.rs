//! Prime enumeration by a segmented sieve of Eratosthenes.

use serde::Serialize;

const SEGMENT: usize = 1 << 16;

/// Ascending list of consecutive primes starting at 2, so `primes[i - 1]`
/// is the i-th prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimeIndex {
    primes: Vec<u64>,
}

impl PrimeIndex {
    pub fn as_slice(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// The i-th prime, 1-based.
    pub fn nth(&self, i: usize) -> Option<u64> {
        i.checked_sub(1).and_then(|k| self.primes.get(k)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().copied()
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.primes
    }
}

fn simple_sieve(limit: usize) -> Vec<u64> {
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// All primes `<= limit`.
pub fn primes_up_to(limit: u64) -> PrimeIndex {
    if limit < 2 {
        return PrimeIndex { primes: Vec::new() };
    }
    let root = crate::ec::field::isqrt(limit) as usize;
    let base = simple_sieve(root);
    let mut primes = Vec::new();
    let mut marks = vec![false; SEGMENT];
    let mut low = 2u64;
    while low <= limit {
        let high = (low + SEGMENT as u64 - 1).min(limit);
        let len = (high - low + 1) as usize;
        marks[..len].fill(false);
        for &b in &base {
            if b * b > high {
                break;
            }
            let mut start = (low.div_ceil(b) * b).max(b * b);
            while start <= high {
                marks[(start - low) as usize] = true;
                start += b;
            }
        }
        primes.extend(
            marks[..len]
                .iter()
                .enumerate()
                .filter(|(_, &m)| !m)
                .map(|(k, _)| low + k as u64),
        );
        low = high + 1;
    }
    PrimeIndex { primes }
}

/// The first k primes.
pub fn first_k_primes(k: usize) -> PrimeIndex {
    if k == 0 {
        return PrimeIndex { primes: Vec::new() };
    }
    // p_k < k (ln k + ln ln k) for k >= 6.
    let bound = if k < 6 {
        13
    } else {
        let kf = k as f64;
        (kf * (kf.ln() + kf.ln().ln())).ceil() as u64 + 1
    };
    let mut primes = primes_up_to(bound).primes;
    primes.truncate(k);
    PrimeIndex { primes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(primes_up_to(10).as_slice(), &[2, 3, 5, 7]);
        assert_eq!(first_k_primes(5).as_slice(), &[2, 3, 5, 7, 11]);
        assert!(primes_up_to(1).is_empty());
        assert_eq!(primes_up_to(2).as_slice(), &[2]);
        assert_eq!(first_k_primes(1).nth(1), Some(2));
    }

    #[test]
    fn prime_counts() {
        assert_eq!(primes_up_to(1_000_000).len(), 78_498);
        assert_eq!(primes_up_to(65_536).len(), 6_542);
        assert_eq!(first_k_primes(10_000).nth(10_000), Some(104_729));
    }

    #[test]
    fn agrees_with_trial_division() {
        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        let expected: Vec<u64> = (0..=100_000).filter(|&n| trial(n)).collect();
        assert_eq!(primes_up_to(100_000).as_slice(), expected.as_slice());
    }
}
