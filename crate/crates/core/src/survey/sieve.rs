//! Segmented sieve of Eratosthenes.

use crate::arith::isqrt;

const SEGMENT: u64 = 1 << 18;

/// Primes `≤ n` by a plain sieve; used for the base primes of a segment.
fn small_primes(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n as usize + 1];
    let mut out = Vec::new();
    for i in 2..=n as usize {
        if !composite[i] {
            out.push(i as u64);
            for j in (i * i..=n as usize).step_by(i) {
                composite[j] = true;
            }
        }
    }
    out
}

/// Ascending primes in `[lo, hi]`, using `O(√hi + SEGMENT)` memory.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for_each_prime_in(lo, hi, |p| out.push(p));
    out
}

/// Calls `f` on each prime in `[lo, hi]` in ascending order.
pub fn for_each_prime_in(lo: u64, hi: u64, mut f: impl FnMut(u64)) {
    let lo = lo.max(2);
    if hi < lo {
        return;
    }
    let base = small_primes(isqrt(hi));
    let mut flags = vec![true; SEGMENT as usize];
    let mut start = lo;
    while start <= hi {
        let end = hi.min(start.saturating_add(SEGMENT - 1));
        let len = (end - start + 1) as usize;
        flags[..len].fill(true);
        for &q in &base {
            if q * q > end {
                break;
            }
            let first = (q * q).max(start.div_ceil(q) * q);
            for m in (first..=end).step_by(q as usize) {
                flags[(m - start) as usize] = false;
            }
        }
        for (i, &is_p) in flags[..len].iter().enumerate() {
            if is_p {
                f(start + i as u64);
            }
        }
        if end == u64::MAX {
            break;
        }
        start = end + 1;
    }
}

/// Ascending primes `≤ x`.
pub fn sieve_primes(x: u64) -> Vec<u64> {
    primes_in(2, x)
}

/// `π(x)`.
pub fn prime_count(x: u64) -> u64 {
    let mut n = 0;
    for_each_prime_in(2, x, |_| n += 1);
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime;

    #[test]
    fn small_cases() {
        assert_eq!(sieve_primes(10), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(2), vec![2]);
        assert!(sieve_primes(1).is_empty());
    }

    #[test]
    fn pi_of_a_million() {
        assert_eq!(prime_count(1_000_000), 78_498);
    }

    #[test]
    fn segments_agree_with_primality_test() {
        let lo = 999_000_000;
        let hi = lo + 3 * SEGMENT + 17;
        let got = primes_in(lo, hi);
        let want: Vec<u64> = (lo..=hi).filter(|&n| is_prime(n)).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn ranges_compose() {
        let whole = primes_in(2, 100_000);
        let mut split = primes_in(2, 40_000);
        split.extend(primes_in(40_001, 100_000));
        assert_eq!(whole, split);
    }
}
