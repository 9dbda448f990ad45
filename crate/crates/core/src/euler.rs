//! Local and global evaluation of the arithmetic Euler products.
//!
//! * `Z(A, B) = prod zeta(1 + a + b)` and its local factor
//!   `Z_p(A, B) = prod (1 - p^{-1-a-b})`;
//! * `A(A, B) = prod_p Z_p(A, B) sum_j tau_A(p^j) tau_B(p^j) p^{-j}`;
//! * `g_A(s, q)`, `G_A(s, q)`, the local densities behind the twisted
//!   divisor sums;
//! * `A_{A,B,a,b}(s)`, the product that appears when the correlation
//!   conjecture is summed against the weight.
//!
//! Every `j`/`d` series stops once its geometric tail estimate falls below
//! [`SERIES_TOL`]; every product over primes stops at a caller-supplied
//! bound and reports a tail estimate.

use num_complex::Complex64;
use serde::Serialize;

use crate::divisor::{homogeneous_powers, pow_neg};
use crate::error::{Error, Result};
use crate::shifts::ShiftSet;
use crate::special::sieve::{primes_up_to, ArithmeticSieve};
use crate::special::zeta::zeta;
use crate::sum::par_map;

/// Tail target for every truncated local series.
pub const SERIES_TOL: f64 = 1e-15;
/// Minimum truncation depth for local series.
pub const MIN_DEPTH: usize = 8;
const MAX_DEPTH: usize = 8192;
/// Smallest admissible `|a + b|` in `zeta(1 + a + b)`.
pub const POLE_GUARD: f64 = 1e-6;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A truncated local Euler factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalFactor {
    pub prime: u64,
    pub value: Complex64,
    /// Index of the last retained series term.
    pub depth: usize,
    pub tail_bound: f64,
}

/// A truncated product over primes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerProduct {
    /// The product over `p <= prime_bound` times the tail correction.
    pub value: Complex64,
    /// The bare product over `p <= prime_bound`.
    pub truncated: Complex64,
    /// `exp(c sum_{p > P} p^{-2})`, with `c` the mean of `p^2 log f_p`
    /// over `p` in `(P/2, P]`.
    pub tail_correction: Complex64,
    /// Largest prime included.
    pub prime_bound: u64,
    pub primes_used: usize,
    /// Estimated `|value - full product|` from the omitted primes.
    pub tail_estimate: f64,
    /// Sum of the local truncation bounds, scaled by `|value|`.
    pub local_truncation: f64,
}

impl EulerProduct {
    pub fn error_estimate(&self) -> f64 {
        self.tail_estimate + self.local_truncation
    }
}

/// `sum_p p^{-2}` over all primes, from `sum_k mu(k)/k log zeta(2k)`.
pub fn prime_zeta_two() -> f64 {
    static V: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *V.get_or_init(|| {
        let mut acc = crate::sum::CompensatedSum::new();
        for k in 1u64..=60 {
            let f = crate::special::sieve::factorize(k);
            if f.iter().any(|&(_, e)| e > 1) {
                continue;
            }
            let mu = if f.len().is_multiple_of(2) { 1.0 } else { -1.0 };
            let z = if k == 1 {
                std::f64::consts::PI.powi(2) / 6.0
            } else {
                crate::special::zeta::zeta_real(2.0 * k as f64).unwrap_or(1.0)
            };
            acc.add_real(mu / k as f64 * z.ln());
        }
        acc.value().re
    })
}

/// `sum_{p > bound} p^{-2}`.
pub fn prime_tail_inverse_square(bound: u64) -> f64 {
    let head = crate::sum::rsum(primes_up_to(bound as usize).into_iter().map(|p| (p as f64).powi(-2)));
    (prime_zeta_two() - head).max(0.0)
}

fn geometric_tail(terms: &[Complex64]) -> Option<f64> {
    let n = terms.len();
    if n < 4 {
        return None;
    }
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.norm()));
    let negligible = 1e-18 * scale.max(1e-300);
    if terms[n - 3..].iter().all(|t| t.norm() <= negligible) {
        return Some(terms[n - 3..].iter().map(|t| t.norm()).sum());
    }
    let mut ratio: f64 = 0.0;
    for k in n - 3..n {
        let prev = terms[k - 1].norm();
        let cur = terms[k].norm();
        if prev <= negligible {
            if cur <= negligible {
                continue;
            }
            return None;
        }
        ratio = ratio.max(cur / prev);
    }
    if ratio >= 1.0 {
        return None;
    }
    Some(terms[n - 1].norm() * ratio / (1.0 - ratio))
}

/// Sums `terms(depth)` (a vector of `depth + 1` terms), doubling the depth
/// until the geometric tail estimate is below `SERIES_TOL * max(1, |sum|)`.
fn converge_series<F>(mut terms: F, what: &str) -> Result<(Complex64, usize, f64)>
where
    F: FnMut(usize) -> Vec<Complex64>,
{
    let mut depth = 16usize;
    loop {
        let t = terms(depth);
        let sum: Complex64 = crate::sum::csum(t.iter().copied());
        if let Some(tail) = geometric_tail(&t) {
            if tail <= SERIES_TOL * sum.norm().max(1.0) {
                return Ok((sum, depth.max(MIN_DEPTH), tail));
            }
        }
        if depth >= MAX_DEPTH {
            return Err(Error::Divergent(format!("{what}: no convergence by depth {depth}")));
        }
        depth *= 2;
    }
}

fn vars(set: &ShiftSet, p: f64) -> Vec<Complex64> {
    set.iter().map(|z| pow_neg(p, z)).collect()
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// `Z(A, B) = prod_{a in A, b in B} zeta(1 + a + b)`.
pub fn z_product(a: &ShiftSet, b: &ShiftSet) -> Result<Complex64> {
    let mut out = ONE;
    for x in a.iter() {
        for y in b.iter() {
            let w = x + y;
            if w.norm() < POLE_GUARD {
                return Err(Error::domain(format!(
                    "pole guard: zeta(1 + a + b) with a = {x}, b = {y} sits on the pole"
                )));
            }
            out *= zeta(ONE + w)?;
        }
    }
    Ok(out)
}

/// `Z_p(A, B) = prod_{a, b} (1 - p^{-1-a-b})`.
pub fn z_local(a: &ShiftSet, b: &ShiftSet, p: u64) -> Complex64 {
    let pf = p as f64;
    let mut out = ONE;
    for x in a.iter() {
        for y in b.iter() {
            out *= ONE - pow_neg(pf, ONE + x + y);
        }
    }
    out
}

fn check_pair_convergence(a: &[Complex64], b: &[Complex64], p: f64, what: &str) -> Result<()> {
    let ratio = max_norm(a) * max_norm(b) / p;
    if ratio >= 1.0 {
        return Err(Error::Divergent(format!("{what}: term ratio {ratio:.3} >= 1 at p = {p}")));
    }
    Ok(())
}

/// `sum_j tau_A(p^j) tau_B(p^j) p^{-j}` truncated at `depth`.
fn theta_series_terms(va: &[Complex64], vb: &[Complex64], p: f64, depth: usize) -> Vec<Complex64> {
    let ha = homogeneous_powers(va, depth);
    let hb = homogeneous_powers(vb, depth);
    let inv = 1.0 / p;
    let mut scale = 1.0;
    let mut out = Vec::with_capacity(depth + 1);
    for j in 0..=depth {
        out.push(ha[j] * hb[j] * scale);
        scale *= inv;
    }
    out
}

/// The local factor `Z_p(A, B) sum_j tau_A(p^j) tau_B(p^j) p^{-j}` of `A(A, B)`.
pub fn local_a_factor(a: &ShiftSet, b: &ShiftSet, p: u64) -> Result<LocalFactor> {
    let pf = p as f64;
    let va = vars(a, pf);
    let vb = vars(b, pf);
    check_pair_convergence(&va, &vb, pf, "A(A, B) local series")?;
    let (sum, depth, tail) = converge_series(|d| theta_series_terms(&va, &vb, pf, d), "A(A, B) local series")?;
    let pre = z_local(a, b, p);
    Ok(LocalFactor {
        prime: p,
        value: pre * sum,
        depth,
        tail_bound: tail * pre.norm(),
    })
}

/// As [`local_a_factor`] with a fixed truncation depth.
pub fn local_a_factor_at_depth(a: &ShiftSet, b: &ShiftSet, p: u64, depth: usize) -> Result<LocalFactor> {
    let pf = p as f64;
    let va = vars(a, pf);
    let vb = vars(b, pf);
    check_pair_convergence(&va, &vb, pf, "A(A, B) local series")?;
    let depth = depth.max(MIN_DEPTH);
    let t = theta_series_terms(&va, &vb, pf, depth);
    let sum = crate::sum::csum(t.iter().copied());
    let pre = z_local(a, b, p);
    Ok(LocalFactor {
        prime: p,
        value: pre * sum,
        depth,
        tail_bound: geometric_tail(&t).unwrap_or(f64::INFINITY) * pre.norm(),
    })
}

/// Multiplies local factors for all primes `<= bound`, ascending, and
/// corrects for the omitted primes assuming `log f_p ~ c / p^2`.
///
/// The tail estimate is three times the drift of `c` between `(P/4, P/2]`
/// and `(P/2, P]`, times `sum_{p > P} p^{-2}`.
pub fn euler_product<F>(bound: u64, local: F) -> Result<EulerProduct>
where
    F: Fn(u64) -> Result<LocalFactor> + Sync + Send,
{
    if bound < 2 {
        return Err(Error::invalid("prime bound must be at least 2"));
    }
    let primes: Vec<u64> = primes_up_to(bound as usize).into_iter().map(u64::from).collect();
    let factors = par_map(&primes, |&p| local(p));
    let mut value = ONE;
    let mut local_tail = 0.0;
    let mut hi = crate::sum::CompensatedSum::new();
    let mut lo = crate::sum::CompensatedSum::new();
    let (mut n_hi, mut n_lo) = (0usize, 0usize);
    for f in factors {
        let f = f?;
        value *= f.value;
        local_tail += f.tail_bound / f.value.norm().max(1e-300);
        let scaled = f.value.ln() * (f.prime as f64).powi(2);
        if 2 * f.prime > bound {
            hi.add(scaled);
            n_hi += 1;
        } else if 4 * f.prime > bound {
            lo.add(scaled);
            n_lo += 1;
        }
    }
    let tail_sum = prime_tail_inverse_square(bound);
    let (correction, tail_estimate) = if n_hi > 0 && n_lo > 0 {
        let c_hi = hi.value() / n_hi as f64;
        let c_lo = lo.value() / n_lo as f64;
        let corr = (c_hi * tail_sum).exp();
        // If c(p) drifts by d per octave, the tail sum weights octave k by
        // about 2^{-k} and the drift there is k d; the weighted total is 2d.
        let drift = 3.0 * (c_hi - c_lo).norm() + c_hi.norm() / bound as f64;
        (corr, drift * tail_sum * (value * corr).norm())
    } else {
        (ONE, f64::INFINITY)
    };
    let corrected = value * correction;
    Ok(EulerProduct {
        value: corrected,
        truncated: value,
        tail_correction: correction,
        prime_bound: bound,
        primes_used: primes.len(),
        tail_estimate,
        local_truncation: local_tail * corrected.norm(),
    })
}

/// `A(A, B)` truncated at primes `<= bound`.
pub fn global_a(a: &ShiftSet, b: &ShiftSet, bound: u64) -> Result<EulerProduct> {
    euler_product(bound, |p| local_a_factor(a, b, p))
}

/// `A(A, B) Z(A, B)`.
pub fn a_times_z(a: &ShiftSet, b: &ShiftSet, bound: u64) -> Result<(Complex64, EulerProduct)> {
    let z = z_product(a, b)?;
    let prod = global_a(a, b, bound)?;
    Ok((prod.value * z, prod))
}

/// `tau_A(p^{j + r}) p^{-js}` series for `j >= 0`, all `r = 0..=r_max` at
/// once, each multiplied by `prod_{a in A} (1 - p^{-s-a})`.
///
/// Entry `r` is the local factor of `g_A(s, q)` at a prime with `q_p = r`.
pub fn g_local_all(a: &ShiftSet, s: Complex64, p: u64, r_max: usize) -> Result<Vec<Complex64>> {
    let pf = p as f64;
    let va = vars(a, pf);
    let x = pow_neg(pf, s);
    let rho = max_norm(&va) * x.norm();
    if !va.is_empty() && rho >= 1.0 {
        return Err(Error::Divergent(format!(
            "g_A(s, p^r) series at p = {p}, s = {s}: ratio {rho:.3} >= 1"
        )));
    }
    let pre: Complex64 = va.iter().map(|&v| ONE - v * x).product();
    let mut out = Vec::with_capacity(r_max + 1);
    // The series for the largest r converges slowest; size the depth for it.
    let mut depth = 16usize;
    loop {
        let h = homogeneous_powers(&va, r_max + depth);
        let mut ok = true;
        out.clear();
        for r in 0..=r_max {
            let mut terms = Vec::with_capacity(depth + 1);
            let mut xp = ONE;
            for j in 0..=depth {
                terms.push(h[j + r] * xp);
                xp *= x;
            }
            let sum = crate::sum::csum(terms.iter().copied());
            let tail = if va.is_empty() { Some(0.0) } else { geometric_tail(&terms) };
            match tail {
                Some(t) if t <= SERIES_TOL * sum.norm().max(1.0) => out.push(pre * sum),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(out);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::Divergent(format!("g_A(s, p^r) at p = {p}: no convergence")));
        }
        depth *= 2;
    }
}

/// The local factor of `g_A(s, q)` at `p` with `q_p = r`.
pub fn g_local(a: &ShiftSet, s: Complex64, p: u64, r: usize) -> Result<Complex64> {
    Ok(g_local_all(a, s, p, r)?[r])
}

/// Caches `g_local_all` rows per prime for one `(A, s)`.
#[derive(Debug, Clone)]
pub struct GCache {
    set: ShiftSet,
    s: Complex64,
    rows: std::collections::HashMap<u64, Vec<Complex64>>,
}

impl GCache {
    pub fn new(a: &ShiftSet, s: Complex64) -> Self {
        GCache {
            set: a.clone(),
            s,
            rows: Default::default(),
        }
    }

    /// Fills rows for `primes` up to exponent `r_max`, in parallel.
    pub fn prefill(&mut self, primes: &[u64], r_max: usize) -> Result<()> {
        let rows = par_map(primes, |&p| g_local_all(&self.set, self.s, p, r_max));
        for (&p, row) in primes.iter().zip(rows) {
            self.rows.insert(p, row?);
        }
        Ok(())
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }

    /// The local factor of `g_A(s, .)` at `p^r`, computing the row if absent.
    pub fn local(&mut self, p: u64, r: usize) -> Result<Complex64> {
        if let Some(row) = self.rows.get(&p) {
            if r < row.len() {
                return Ok(row[r]);
            }
        }
        let row = g_local_all(&self.set, self.s, p, r.max(4) + 2)?;
        let v = row[r];
        self.rows.insert(p, row);
        Ok(v)
    }

    /// As [`GCache::local`] without inserting; fails on a miss.
    pub fn get(&self, p: u64, r: usize) -> Result<Complex64> {
        self.rows
            .get(&p)
            .and_then(|row| row.get(r).copied())
            .ok_or(Error::Bounds {
                index: p,
                limit: r as u64,
            })
    }
}

/// `G_A(s, q) = sum_{d | q} mu(d)/phi(d) d^s sum_{e | d} mu(e) e^{-s} g_A(s, q e / d)`,
/// evaluated literally as a double divisor sum.
pub fn g_big(a: &ShiftSet, s: Complex64, q: u64, sieve: &ArithmeticSieve) -> Result<Complex64> {
    if q == 0 {
        return Err(Error::invalid("G_A(s, q) needs q >= 1"));
    }
    if q as usize > sieve.limit() {
        return Err(Error::Bounds {
            index: q,
            limit: sieve.limit() as u64,
        });
    }
    let q_factors = sieve.factorize(q as usize);
    g_big_factored(a, s, &q_factors)
}

/// [`g_big`] for `q` given by its factorization.
pub fn g_big_factored(a: &ShiftSet, s: Complex64, q_factors: &[(u64, u32)]) -> Result<Complex64> {
    let mut cache = GCache::new(a, s);
    g_big_with(s, q_factors, |p, r| cache.local(p, r))
}

/// The double divisor sum for `G(s, q)` with the local factors of `g(s, .)`
/// supplied by `g_local(p, r)`.
pub fn g_big_with<F>(s: Complex64, q_factors: &[(u64, u32)], mut g_local: F) -> Result<Complex64>
where
    F: FnMut(u64, usize) -> Result<Complex64>,
{
    let m = q_factors.len();
    if m > 20 {
        return Err(Error::invalid("too many prime factors"));
    }
    // local g values at the full and the reduced exponent, per prime
    let mut full = Vec::with_capacity(m);
    let mut reduced = Vec::with_capacity(m);
    for &(p, e) in q_factors {
        full.push(g_local(p, e as usize)?);
        reduced.push(if e > 0 { g_local(p, e as usize - 1)? } else { ZERO });
    }
    let mut total = crate::sum::CompensatedSum::new();
    // d runs over squarefree divisors of q (bitmask `dm`), e over divisors of d
    for dm in 0u32..(1u32 << m) {
        let mut mu_d = 1.0;
        let mut phi_d = 1.0;
        let mut ln_d = 0.0;
        for (i, &(p, _)) in q_factors.iter().enumerate() {
            if dm & (1 << i) != 0 {
                mu_d = -mu_d;
                phi_d *= p as f64 - 1.0;
                ln_d += (p as f64).ln();
            }
        }
        let mut inner = crate::sum::CompensatedSum::new();
        let mut em = dm;
        loop {
            // e = em (a subset of dm); q e / d lowers the exponent at primes in d \ e
            let mut g = ONE;
            let mut mu_e = 1.0;
            let mut ln_e = 0.0;
            for (i, &(p, _)) in q_factors.iter().enumerate() {
                let in_d = dm & (1 << i) != 0;
                let in_e = em & (1 << i) != 0;
                if in_e {
                    mu_e = -mu_e;
                    ln_e += (p as f64).ln();
                }
                g *= if in_d && !in_e { reduced[i] } else { full[i] };
            }
            inner.add(g * mu_e * (-s * ln_e).exp());
            if em == 0 {
                break;
            }
            em = (em - 1) & dm;
        }
        total.add(inner.value() * (s * ln_d).exp() * (mu_d / phi_d));
    }
    Ok(total.value())
}

/// `G_A(s, p^r)` for `r = 0..=r_max` from the prime-power case of the
/// double divisor sum: `G(s, 1) = 1` and, for `r >= 1`,
/// `G(s, p^r) = p/(p-1) g(s, p^r) - p^s/(p-1) g(s, p^{r-1})`.
pub fn g_big_prime_powers(a: &ShiftSet, s: Complex64, p: u64, r_max: usize) -> Result<Vec<Complex64>> {
    let g = g_local_all(a, s, p, r_max)?;
    let pf = p as f64;
    let ps = (s * pf.ln()).exp();
    let mut out = Vec::with_capacity(r_max + 1);
    out.push(ONE);
    for r in 1..=r_max {
        out.push(g[r] * (pf / (pf - 1.0)) - ps * g[r - 1] / (pf - 1.0));
    }
    Ok(out)
}

/// The pair `(a_hat, b_hat)` selected from `A` and `B` by index, with the
/// remaining sets `A'` and `B'`.
#[derive(Debug, Clone)]
pub struct SwapPair {
    pub alpha_hat: Complex64,
    pub beta_hat: Complex64,
    pub a_rest: ShiftSet,
    pub b_rest: ShiftSet,
}

impl SwapPair {
    pub fn new(a: &ShiftSet, b: &ShiftSet, ia: usize, ib: usize) -> Result<Self> {
        if ia >= a.len() || ib >= b.len() {
            return Err(Error::invalid(format!(
                "swap indices ({ia}, {ib}) out of range for sets of size {} and {}",
                a.len(),
                b.len()
            )));
        }
        Ok(SwapPair {
            alpha_hat: a.as_slice()[ia],
            beta_hat: b.as_slice()[ib],
            a_rest: a.without(ia),
            b_rest: b.without(ib),
        })
    }

    /// `A' + {-b_hat - s}` and `B'_s + {-a_hat}`: the sets whose `A` factor
    /// equals `A_{A,B,a_hat,b_hat}(s)`.
    pub fn swapped_sets(&self, s: Complex64) -> (ShiftSet, ShiftSet) {
        (
            self.a_rest.with(-self.beta_hat - s),
            self.b_rest.translate(s).with(-self.alpha_hat),
        )
    }
}

/// Per-prime data for `A_{A,B,a_hat,b_hat}(s)` that does not depend on `s`.
#[derive(Debug, Clone)]
pub struct AhatPrime {
    pub prime: u64,
    /// `G_A(1 - a_hat, p^d)` for `d = 0..=depth + 1`.
    pub ga: Vec<Complex64>,
    /// `G_B(1 - b_hat, p^d)` for `d = 0..=depth + 1`.
    pub gb: Vec<Complex64>,
    /// `prod_{a in A'} p^{-a}` style variables for the prefactor.
    pair_sums: Vec<Complex64>,
}

/// Precomputed `G` values for evaluating the local factors of
/// `A_{A,B,a_hat,b_hat}(s)` at many `s` with `Re s >= min_re_s`.
#[derive(Debug, Clone)]
pub struct AhatTable {
    pub pair: SwapPair,
    pub min_re_s: f64,
    pub primes: Vec<AhatPrime>,
    pub prime_bound: u64,
}

fn ahat_depth(rho: f64) -> usize {
    // rho^d d^m small enough for every term beyond the depth
    let mut d = MIN_DEPTH;
    while d < MAX_DEPTH && rho.powi(d as i32) * (d as f64).powi(8) > 1e-19 {
        d += 4;
    }
    d
}

impl AhatPrime {
    fn build(pair: &SwapPair, a: &ShiftSet, b: &ShiftSet, p: u64, min_re_s: f64) -> Result<Self> {
        let pf = p as f64;
        let ra = max_norm(&vars(&pair.a_rest, pf)).max(1.0);
        let rb = max_norm(&vars(&pair.b_rest, pf)).max(1.0);
        let rho = ra * rb * pf.powf(-1.0 - min_re_s);
        if rho >= 1.0 {
            return Err(Error::Divergent(format!(
                "A_hat local series at p = {p}: ratio {rho:.3} >= 1 for Re s >= {min_re_s}"
            )));
        }
        let depth = ahat_depth(rho);
        let ga = g_big_prime_powers(a, ONE - pair.alpha_hat, p, depth + 1)?;
        let gb = g_big_prime_powers(b, ONE - pair.beta_hat, p, depth + 1)?;
        let mut pair_sums = Vec::new();
        for x in pair.a_rest.iter() {
            for y in pair.b_rest.iter() {
                pair_sums.push(x + y);
            }
        }
        Ok(AhatPrime {
            prime: p,
            ga,
            gb,
            pair_sums,
        })
    }

    /// The local factor at `s`.
    pub fn eval(&self, pair: &SwapPair, s: Complex64) -> Result<LocalFactor> {
        let pf = self.prime as f64;
        let ln_p = pf.ln();
        let mut pre = ONE;
        for &w in &self.pair_sums {
            pre *= ONE - (-(ONE + w + s) * ln_p).exp();
        }
        let x = (-(ONE + s) * ln_p).exp(); // p^{-1-s}
        let q_factor = (-(Complex64::new(2.0, 0.0) - pair.alpha_hat - pair.beta_hat) * ln_p).exp();
        let depth = self.ga.len() - 2;
        let mut terms = Vec::with_capacity(depth + 1);
        let mut xp = ONE;
        for d in 0..=depth {
            let t = self.ga[d] * self.gb[d] - q_factor * self.ga[d + 1] * self.gb[d + 1];
            terms.push(t * xp);
            xp *= x;
        }
        let sum = crate::sum::csum(terms.iter().copied());
        let tail = geometric_tail(&terms).unwrap_or(f64::INFINITY);
        if tail > 1e3 * SERIES_TOL * sum.norm().max(1.0) {
            return Err(Error::Divergent(format!(
                "A_hat local series at p = {}, s = {s}: tail {tail:e} after depth {depth}",
                self.prime
            )));
        }
        Ok(LocalFactor {
            prime: self.prime,
            value: pre * sum,
            depth,
            tail_bound: tail * pre.norm(),
        })
    }
}

impl AhatTable {
    pub fn build(a: &ShiftSet, b: &ShiftSet, ia: usize, ib: usize, bound: u64, min_re_s: f64) -> Result<Self> {
        let pair = SwapPair::new(a, b, ia, ib)?;
        let primes: Vec<u64> = primes_up_to(bound as usize).into_iter().map(u64::from).collect();
        let built = par_map(&primes, |&p| AhatPrime::build(&pair, a, b, p, min_re_s));
        let primes = built.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(AhatTable {
            pair,
            min_re_s,
            primes,
            prime_bound: bound,
        })
    }

    fn check_s(&self, s: Complex64) -> Result<()> {
        if s.re < self.min_re_s - 1e-12 {
            return Err(Error::domain(format!(
                "A_hat evaluated at Re s = {} below the table's convergence floor {}",
                s.re, self.min_re_s
            )));
        }
        Ok(())
    }

    pub fn local(&self, p_index: usize, s: Complex64) -> Result<LocalFactor> {
        self.check_s(s)?;
        self.primes[p_index].eval(&self.pair, s)
    }

    /// `A_{A,B,a_hat,b_hat}(s)` over the table's primes, with the usual
    /// tail estimate.
    pub fn global(&self, s: Complex64) -> Result<EulerProduct> {
        self.check_s(s)?;
        let index: std::collections::HashMap<u64, usize> =
            self.primes.iter().enumerate().map(|(i, p)| (p.prime, i)).collect();
        euler_product(self.prime_bound, |p| self.primes[index[&p]].eval(&self.pair, s))
    }

    /// Product value only, evaluated sequentially (for use inside parallel callers).
    pub fn global_value(&self, s: Complex64) -> Result<Complex64> {
        self.check_s(s)?;
        let mut v = ONE;
        for p in &self.primes {
            v *= p.eval(&self.pair, s)?.value;
        }
        Ok(v)
    }
}

/// Local factor of `A_{A,B,a_hat,b_hat}(s)` at `p`, where `a_hat = A[ia]`
/// and `b_hat = B[ib]`.
pub fn local_a_hat(a: &ShiftSet, b: &ShiftSet, ia: usize, ib: usize, s: Complex64, p: u64) -> Result<LocalFactor> {
    let pair = SwapPair::new(a, b, ia, ib)?;
    let min_re = s.re.min(0.0);
    AhatPrime::build(&pair, a, b, p, min_re)?.eval(&pair, s)
}

/// `A_{A,B,a_hat,b_hat}(s)` over primes `<= bound`.
pub fn global_a_hat(a: &ShiftSet, b: &ShiftSet, ia: usize, ib: usize, s: Complex64, bound: u64) -> Result<EulerProduct> {
    AhatTable::build(a, b, ia, ib, bound, s.re.min(0.0))?.global(s)
}
