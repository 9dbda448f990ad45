//! The shifted divisor function
//! `tau_A(n) = sum over m_1 ... m_k = n of m_1^{-a_1} ... m_k^{-a_k}`.
//!
//! At a prime power `tau_A(p^j)` is the complete homogeneous symmetric
//! polynomial of degree `j` in the variables `p^{-a}`. Tables for all
//! `n <= N` are assembled multiplicatively from those values over a
//! smallest-prime-factor sieve.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::shifts::ShiftSet;
use crate::special::sieve::{factorize, smallest_prime_factors, try_alloc};

const TABLE_MAGIC: &[u8; 4] = b"ZMW1";

/// `p^{-z}` for real `p > 0`.
#[inline]
pub fn pow_neg(p: f64, z: Complex64) -> Complex64 {
    (-z * p.ln()).exp()
}

/// Complete homogeneous symmetric polynomials `h_0..=h_depth` of `vars`.
///
/// Adding one variable `x` at a time applies
/// `h_r(S + {x}) = h_r(S) + x * h_{r-1}(S + {x})`.
pub fn homogeneous_powers(vars: &[Complex64], depth: usize) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); depth + 1];
    h[0] = Complex64::new(1.0, 0.0);
    for &x in vars {
        for r in 1..=depth {
            let prev = h[r - 1];
            h[r] += x * prev;
        }
    }
    h
}

/// `[tau_A(1), tau_A(p), ..., tau_A(p^depth)]`.
pub fn tau_prime_powers(a: &ShiftSet, p: u64, depth: usize) -> Vec<Complex64> {
    let pf = p as f64;
    let vars: Vec<Complex64> = a.iter().map(|z| pow_neg(pf, z)).collect();
    homogeneous_powers(&vars, depth)
}

/// `tau_A(p^j)` for `j = 0..=depth`, rejecting negative depths.
pub fn tau_prime_powers_checked(a: &ShiftSet, p: u64, depth: i64) -> Result<Vec<Complex64>> {
    if depth < 0 {
        return Err(Error::invalid(format!("prime-power depth must be >= 0, got {depth}")));
    }
    if !crate::special::sieve::is_prime(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    Ok(tau_prime_powers(a, p, depth as usize))
}

/// `tau_A(n)` by trial division.
pub fn tau_at(a: &ShiftSet, n: u64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::invalid("tau_A(n) is defined for n >= 1"));
    }
    Ok(factorize(n)
        .into_iter()
        .map(|(p, e)| tau_prime_powers(a, p, e as usize)[e as usize])
        .product())
}

/// Values `tau_A(n)` for `1 <= n <= limit`. Index 0 holds zero.
#[derive(Clone)]
pub struct ShiftedTauTable {
    shifts: ShiftSet,
    values: Vec<Complex64>,
}

impl std::fmt::Debug for ShiftedTauTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ShiftedTauTable")
            .field("shifts", &self.shifts)
            .field("limit", &self.limit())
            .finish()
    }
}

impl ShiftedTauTable {
    /// Bytes of table storage per entry.
    pub const BYTES_PER_ENTRY: usize = std::mem::size_of::<Complex64>();

    /// Builds the table for `n <= limit`.
    ///
    /// Peak memory is 16 bytes per entry for the values plus 4 bytes per
    /// entry for the transient smallest-prime-factor array.
    pub fn build(a: &ShiftSet, limit: usize) -> Result<Self> {
        if limit < 1 {
            return Err(Error::invalid("table limit must be at least 1"));
        }
        let (spf, _) = smallest_prime_factors(limit)?;
        let zero = Complex64::new(0.0, 0.0);
        let mut values = try_alloc(limit + 1, zero, "tau table")?;
        values[1] = Complex64::new(1.0, 0.0);
        for n in 2..=limit {
            let p = spf[n] as usize;
            if p == n {
                // Fill every power of the new prime at once.
                let mut depth = 1;
                let mut pk = p;
                while pk <= limit / p {
                    pk *= p;
                    depth += 1;
                }
                let powers = tau_prime_powers(a, p as u64, depth);
                let mut pk = p;
                for &v in &powers[1..] {
                    values[pk] = v;
                    pk = pk.saturating_mul(p);
                }
                continue;
            }
            let mut m = n / p;
            while m.is_multiple_of(p) {
                m /= p;
            }
            if m == 1 {
                continue; // prime power, already set
            }
            values[n] = values[n / m] * values[m];
        }
        Ok(ShiftedTauTable {
            shifts: a.clone(),
            values,
        })
    }

    pub fn shifts(&self) -> &ShiftSet {
        &self.shifts
    }

    pub fn limit(&self) -> usize {
        self.values.len() - 1
    }

    /// `tau_A(n)`; panics when `n` is 0 or beyond the limit.
    #[inline]
    pub fn get(&self, n: usize) -> Complex64 {
        assert!(n >= 1, "tau table is indexed from 1");
        self.values[n]
    }

    pub fn try_get(&self, n: u64) -> Result<Complex64> {
        if n == 0 || n > self.limit() as u64 {
            return Err(Error::Bounds {
                index: n,
                limit: self.limit() as u64,
            });
        }
        Ok(self.values[n as usize])
    }

    /// Values with index 0 (always zero) included, so `raw()[n] == tau_A(n)`.
    pub fn raw(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn ensure_covers(&self, n: u64) -> Result<()> {
        if n > self.limit() as u64 {
            return Err(Error::Bounds {
                index: n,
                limit: self.limit() as u64,
            });
        }
        Ok(())
    }

    /// Writes the flat binary form: `"ZMW1"`, `k: u32`, `N: u64`, `k` shifts
    /// as `(re, im)` pairs, then `tau(1..=N)` as `2N` values; all little-endian.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(TABLE_MAGIC)?;
        w.write_all(&(self.shifts.len() as u32).to_le_bytes())?;
        w.write_all(&(self.limit() as u64).to_le_bytes())?;
        for z in self.shifts.iter() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(16 * 4096);
        for chunk in self.values[1..].chunks(4096) {
            buf.clear();
            for z in chunk {
                buf.extend_from_slice(&z.re.to_le_bytes());
                buf.extend_from_slice(&z.im.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != TABLE_MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let k = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        if k == 0 || k > 64 {
            return Err(Error::Format(format!("implausible shift count {k}")));
        }
        let mut read_f64 = |r: &mut R| -> Result<f64> {
            r.read_exact(&mut b8)?;
            Ok(f64::from_le_bytes(b8))
        };
        let mut shifts = Vec::with_capacity(k);
        for _ in 0..k {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            shifts.push(Complex64::new(re, im));
        }
        let shifts = ShiftSet::multiset(shifts).map_err(|e| Error::Format(e.to_string()))?;
        let mut values = try_alloc(n + 1, Complex64::new(0.0, 0.0), "tau table")?;
        for v in values.iter_mut().skip(1) {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            *v = Complex64::new(re, im);
        }
        Ok(ShiftedTauTable { shifts, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
        (a - b).norm() <= rel * b.norm().max(1e-300)
    }

    /// Sum over ordered factorizations of `n` into `k` parts.
    fn brute_tau(a: &[Complex64], n: u64) -> Complex64 {
        if a.is_empty() {
            return c(if n == 1 { 1.0 } else { 0.0 }, 0.0);
        }
        let mut total = c(0.0, 0.0);
        for d in crate::special::sieve::divisors(n) {
            total += pow_neg(d as f64, a[0]) * brute_tau(&a[1..], n / d);
        }
        total
    }

    #[test]
    fn prime_powers_trivial_cases() {
        let d2 = ShiftSet::multiset(vec![c(0.0, 0.0); 2]).unwrap();
        let v = tau_prime_powers(&d2, 7, 3);
        assert_eq!(v, vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let d3 = ShiftSet::multiset(vec![c(0.0, 0.0); 3]).unwrap();
        assert_eq!(tau_prime_powers(&d3, 5, 2), vec![c(1.0, 0.0), c(3.0, 0.0), c(6.0, 0.0)]);
        let alpha = c(0.1, 0.2);
        let single = ShiftSet::new(vec![alpha]).unwrap();
        let v = tau_prime_powers(&single, 3, 2);
        assert!(close(v[1], pow_neg(3.0, alpha), 1e-15));
        assert!(close(v[2], pow_neg(3.0, 2.0 * alpha), 1e-14));
        assert!(tau_prime_powers_checked(&single, 3, -1).is_err());
        assert!(tau_prime_powers_checked(&single, 4, 1).is_err());
    }

    #[test]
    fn prime_powers_match_composition_enumeration() {
        let a = ShiftSet::new(vec![c(0.07, -0.03), c(-0.11, 0.05), c(0.02, 0.12)]).unwrap();
        let v = tau_prime_powers(&a, 3, 5);
        for (j, &value) in v.iter().enumerate() {
            let brute = brute_tau(a.as_slice(), 3u64.pow(j as u32));
            assert!(close(value, brute, 1e-13), "j = {j}");
        }
    }

    #[test]
    fn table_trivial_values() {
        let zero = ShiftSet::real(&[0.0]).unwrap();
        let t = ShiftedTauTable::build(&zero, 10).unwrap();
        assert!((1..=10).all(|n| t.get(n) == c(1.0, 0.0)));
        let d = ShiftSet::multiset(vec![c(0.0, 0.0); 2]).unwrap();
        let t = ShiftedTauTable::build(&d, 12).unwrap();
        assert_eq!(t.get(12), c(6.0, 0.0));
        assert_eq!(tau_at(&d, 6).unwrap(), c(4.0, 0.0));
        let d3 = ShiftSet::multiset(vec![c(0.0, 0.0); 3]).unwrap();
        assert_eq!(tau_at(&d3, 4).unwrap(), c(6.0, 0.0));
        assert!(tau_at(&d, 0).is_err());
    }

    #[test]
    fn table_matches_direct_divisor_sum() {
        let a = ShiftSet::real(&[0.02, -0.02]).unwrap();
        let t = ShiftedTauTable::build(&a, 10_000).unwrap();
        for k in 0..50u64 {
            let n = 1 + (k * 7919 + 13) % 10_000;
            let direct: f64 = crate::special::sieve::divisors(n)
                .iter()
                .map(|&d| (d as f64).powf(-0.02) * ((n / d) as f64).powf(0.02))
                .sum();
            assert!((t.get(n as usize).re - direct).abs() < 1e-12 * direct);
            assert_eq!(t.get(n as usize).im, 0.0);
        }
    }

    #[test]
    fn tau_at_equals_factorwise_product() {
        let a = ShiftSet::new(vec![c(0.05, 0.01), c(-0.08, 0.0), c(0.0, -0.06)]).unwrap();
        let expected = tau_prime_powers(&a, 2, 4)[4] * tau_prime_powers(&a, 3, 2)[2] * tau_prime_powers(&a, 5, 1)[1];
        assert!(close(tau_at(&a, 720).unwrap(), expected, 1e-14));
        let t = ShiftedTauTable::build(&a, 1000).unwrap();
        assert!(close(t.get(720), expected, 1e-14));
        assert!(close(brute_tau(a.as_slice(), 720), expected, 1e-13));
    }

    #[test]
    fn binary_round_trip() {
        let a = ShiftSet::new(vec![c(0.05, 0.01), c(-0.08, 0.0)]).unwrap();
        let t = ShiftedTauTable::build(&a, 500).unwrap();
        let mut bytes = Vec::new();
        t.write_to(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"ZMW1");
        assert_eq!(bytes.len(), 4 + 4 + 8 + 2 * 16 + 500 * 16);
        let back = ShiftedTauTable::read_from(bytes.as_slice()).unwrap();
        assert_eq!(back.shifts(), t.shifts());
        assert_eq!(back.raw(), t.raw());
        assert!(ShiftedTauTable::read_from(&b"ZMW2xxxxxxxxxxxx"[..]).is_err());
    }

    fn arb_shifts(max_len: usize) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-0.2f64..0.2, -0.2f64..0.2).prop_map(|(r, i)| c(r, i)), 1..=max_len)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn multiplicative_and_permutation_invariant(shifts in arb_shifts(4), m in 1u64..300, n in 1u64..300) {
            let a = ShiftSet::multiset(shifts.clone()).unwrap();
            let mut rev = shifts.clone();
            rev.reverse();
            let b = ShiftSet::multiset(rev).unwrap();
            let t = ShiftedTauTable::build(&a, 90_000).unwrap();
            fn gcd(a: u64, b: u64) -> u64 { if b == 0 { a } else { gcd(b, a % b) } }
            if gcd(m, n) == 1 {
                prop_assert!(close(t.get((m * n) as usize), t.get(m as usize) * t.get(n as usize), 1e-12));
            }
            prop_assert!(close(tau_at(&b, m * n).unwrap(), t.get((m * n) as usize), 1e-12));
            let tc = ShiftedTauTable::build(&a.conj(), 2000).unwrap();
            for k in [1usize, 2, 12, 360, 1999] {
                prop_assert!(close(tc.get(k), t.get(k).conj(), 1e-13));
            }
        }

        #[test]
        fn recursion_holds_for_every_removed_shift(shifts in arb_shifts(4), pi in 0usize..15) {
            let primes = crate::special::sieve::primes_up_to(50);
            let p = primes[pi] as u64;
            let a = ShiftSet::multiset(shifts).unwrap();
            let full = tau_prime_powers(&a, p, 12);
            for i in 0..a.len() {
                let rest = tau_prime_powers(&a.without(i), p, 12);
                let x = pow_neg(p as f64, a.as_slice()[i]);
                for r in 1..=12 {
                    let rhs = rest[r] + x * full[r - 1];
                    prop_assert!(close(full[r], rhs, 1e-12));
                }
            }
        }
    }
}
