//! Linear sieve: smallest prime factors, primes, Möbius and Euler's totient.

use crate::error::{Error, Result};

pub(crate) fn try_alloc<T: Clone>(len: usize, fill: T, what: &'static str) -> Result<Vec<T>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len).map_err(|_| Error::Resource {
        what,
        requested_bytes: len.saturating_mul(std::mem::size_of::<T>()),
    })?;
    v.resize(len, fill);
    Ok(v)
}

/// Smallest-prime-factor table for `0..=limit` (entries 0 and 1 are 0) and the
/// ascending list of primes up to `limit`.
pub fn smallest_prime_factors(limit: usize) -> Result<(Vec<u32>, Vec<u32>)> {
    if limit > u32::MAX as usize {
        return Err(Error::invalid(format!("sieve limit {limit} exceeds u32 range")));
    }
    let mut spf = try_alloc(limit + 1, 0u32, "smallest-prime-factor table")?;
    let mut primes = Vec::new();
    for n in 2..=limit {
        if spf[n] == 0 {
            spf[n] = n as u32;
            primes.push(n as u32);
        }
        let pn = spf[n];
        for &p in &primes {
            if p > pn {
                break;
            }
            let m = n * p as usize;
            if m > limit {
                break;
            }
            spf[m] = p;
        }
    }
    Ok((spf, primes))
}

/// Primes up to `limit`, ascending.
pub fn primes_up_to(limit: usize) -> Vec<u32> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for n in 2..=limit {
        if !composite[n] {
            out.push(n as u32);
            let mut m = n * n;
            while m <= limit {
                composite[m] = true;
                m += n;
            }
        }
    }
    out
}

/// Prime factorization by trial division, as `(p, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).first() == Some(&(n, 1))
}

/// Positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Möbius function, totient and primes up to a fixed limit.
#[derive(Debug, Clone)]
pub struct ArithmeticSieve {
    limit: usize,
    mobius: Vec<i8>,
    totient: Vec<u64>,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl ArithmeticSieve {
    pub fn build(limit: usize) -> Result<Self> {
        if limit < 1 {
            return Err(Error::invalid("sieve limit must be at least 1"));
        }
        let (spf, primes) = smallest_prime_factors(limit)?;
        let mut mobius = try_alloc(limit + 1, 0i8, "Möbius table")?;
        let mut totient = try_alloc(limit + 1, 0u64, "totient table")?;
        mobius[1] = 1;
        totient[1] = 1;
        for n in 2..=limit {
            let p = spf[n] as usize;
            let m = n / p;
            if spf[m] as usize == p {
                mobius[n] = 0;
                totient[n] = totient[m] * p as u64;
            } else {
                mobius[n] = -mobius[m];
                totient[n] = totient[m] * (p as u64 - 1);
            }
        }
        Ok(ArithmeticSieve {
            limit,
            mobius,
            totient,
            spf,
            primes,
        })
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn mobius(&self, n: usize) -> i8 {
        self.mobius[n]
    }

    pub fn totient(&self, n: usize) -> u64 {
        self.totient[n]
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    /// Factorization of `n <= limit` through the smallest-prime-factor table.
    pub fn factorize(&self, mut n: usize) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        out
    }

    /// Squarefree divisors of `n` paired with their Möbius values.
    pub fn squarefree_divisors(&self, n: usize) -> Vec<(u64, i8)> {
        let mut out = vec![(1u64, 1i8)];
        for (p, _) in self.factorize(n) {
            let len = out.len();
            for i in 0..len {
                let (d, mu) = out[i];
                out.push((d * p, -mu));
            }
        }
        out.sort_unstable();
        out
    }
}
