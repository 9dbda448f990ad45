//! Prime-by-prime checks of the identities behind the one-swap Euler product.
//!
//! Each check evaluates both sides through separate code paths: literal
//! definitions (composition sums for `tau`, the double divisor sum for `G`)
//! against the closed forms and recursions used elsewhere in the crate.
//!
//! Residuals are `|lhs - rhs| / max(|lhs|, |rhs|, scale)`, where `scale` is
//! the magnitude of the ingredients. This keeps exact zeros (e.g. `tau` of
//! the empty set) from turning rounding noise into a relative error of 1.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::divisor::{pow_neg, tau_prime_powers, ShiftedTauTable};
use crate::error::{Error, Result};
use crate::euler::{self, GCache, SwapPair};
use crate::shifts::ShiftSet;
use crate::sum::{chunked_sum, par_map, CompensatedSum};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Primes used for random draws.
pub const DRAW_PRIMES: [u64; 4] = [2, 3, 5, 7];
/// Radius of the disk the random shifts are drawn from.
pub const DRAW_RADIUS: f64 = 0.1;
/// Minimum distance between shifts of one set, and between `a` and `-b`.
pub const DRAW_SEPARATION: f64 = 1e-3;
/// Points `s` at which the shifted form of the local identity is checked.
pub const S_GRID: [(f64, f64); 5] = [(-0.1, -0.1), (0.2, -0.1), (0.05, 0.0), (-0.1, 0.1), (0.2, 0.1)];

const MAX_SERIES_TERMS: usize = 4096;
const G_ROWS: usize = 192;

/// Truncation controls shared by the checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Largest exponent `r` in the term-by-term checks.
    pub depth: usize,
    /// A series stops once three consecutive terms fall below
    /// `series_tol * max(|partial sum|, 1)`.
    pub series_tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            depth: 10,
            series_tol: 1e-18,
        }
    }
}

/// One residual of one identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub part: String,
    pub value: f64,
}

/// All residuals of one identity for one parameter choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub identity: String,
    pub residuals: Vec<Residual>,
}

impl CheckReport {
    fn new(identity: &str) -> Self {
        CheckReport {
            identity: identity.to_string(),
            residuals: Vec::new(),
        }
    }

    fn push(&mut self, part: impl Into<String>, value: f64) {
        self.residuals.push(Residual {
            part: part.into(),
            value,
        });
    }

    /// Largest residual; NaN counts as infinite.
    pub fn max(&self) -> f64 {
        self.residuals
            .iter()
            .map(|r| if r.value.is_nan() { f64::INFINITY } else { r.value })
            .fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        if self.residuals.is_empty() {
            return 0.0;
        }
        self.residuals.iter().map(|r| r.value).sum::<f64>() / self.residuals.len() as f64
    }
}

fn residual(lhs: Complex64, rhs: Complex64, scale: f64) -> f64 {
    (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(scale).max(f64::MIN_POSITIVE)
}

/// Sums `term(0), term(1), ...` until three consecutive terms are negligible.
fn sum_series<F>(mut term: F, tol: f64, what: &str) -> Result<Complex64>
where
    F: FnMut(usize) -> Result<Complex64>,
{
    let mut acc = CompensatedSum::new();
    let mut quiet = 0;
    for n in 0..MAX_SERIES_TERMS {
        let t = term(n)?;
        acc.add(t);
        if t.norm() <= tol * acc.value().norm().max(1.0) {
            quiet += 1;
            if quiet >= 3 && n >= 4 {
                return Ok(acc.value());
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::Divergent(format!("{what}: no convergence after {MAX_SERIES_TERMS} terms")))
}

/// `tau_A(p^r)` summed literally over compositions `j_1 + ... + j_k = r`.
pub fn tau_literal(a: &ShiftSet, p: u64, r: usize) -> Complex64 {
    fn rec(shifts: &[Complex64], ln_p: f64, r: usize) -> Complex64 {
        match shifts {
            [] => {
                if r == 0 {
                    ONE
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            [last] => (-*last * (r as f64 * ln_p)).exp(),
            [first, rest @ ..] => {
                let mut acc = CompensatedSum::new();
                for j in 0..=r {
                    acc.add((-*first * (j as f64 * ln_p)).exp() * rec(rest, ln_p, r - j));
                }
                acc.value()
            }
        }
    }
    rec(a.as_slice(), (p as f64).ln(), r)
}

/// `tau_A(p^r) = tau_{A'}(p^r) + p^{-a} tau_A(p^{r-1})` for every `a` in `A`
/// and `1 <= r <= R`.
pub fn check_tauid(a: &ShiftSet, p: u64, opts: &CheckOptions) -> Result<CheckReport> {
    if a.is_empty() {
        return Err(Error::invalid("the recursion needs a non-empty set"));
    }
    let mut report = CheckReport::new("tauid");
    let full: Vec<Complex64> = (0..=opts.depth).map(|r| tau_literal(a, p, r)).collect();
    let rec = tau_prime_powers(a, p, opts.depth);
    for (i, x) in a.iter().enumerate() {
        let rest = tau_prime_powers(&a.without(i), p, opts.depth);
        let px = pow_neg(p as f64, x);
        for r in 1..=opts.depth {
            let rhs = rest[r] + px * rec[r - 1];
            let scale = rest[r].norm() + (px * rec[r - 1]).norm();
            report.push(format!("a[{i}], r = {r}"), residual(full[r], rhs, scale));
        }
    }
    Ok(report)
}

/// `sum_{d <= r} p^{(r-d) b} tau_{A'}(p^d) = tau_{A' + {-b}}(p^r)` for `r <= R`.
pub fn check_convolution_id(a_rest: &ShiftSet, beta_hat: Complex64, p: u64, opts: &CheckOptions) -> Result<CheckReport> {
    let mut report = CheckReport::new("convolution");
    let ta = tau_prime_powers(a_rest, p, opts.depth);
    let union = a_rest.with(-beta_hat);
    let ln_p = (p as f64).ln();
    for r in 0..=opts.depth {
        let mut lhs = CompensatedSum::new();
        let mut scale = 0.0;
        for (d, &tau) in ta.iter().enumerate().take(r + 1) {
            let t = (beta_hat * ((r - d) as f64 * ln_p)).exp() * tau;
            scale += t.norm();
            lhs.add(t);
        }
        report.push(format!("r = {r}"), residual(lhs.value(), tau_literal(&union, p, r), scale));
    }
    Ok(report)
}

/// `sum_j tau_S(p^{j + r}) x^j` for a convergent ratio `x`.
fn shifted_tau_series(h: &[Complex64], r: usize, x: Complex64, tol: f64) -> Result<Complex64> {
    let mut xp = ONE;
    sum_series(
        |j| {
            let v = h.get(j + r).copied().ok_or_else(|| Error::Divergent("tau table exhausted".into()))?;
            let t = v * xp;
            xp *= x;
            Ok(t)
        },
        tol,
        "tau_S(p^{j+r}) series",
    )
}

fn tau_rows(set: &ShiftSet, p: u64, tol: f64) -> Vec<Complex64> {
    // Long enough for p = 2 with shifts of size 0.3 at tol = 1e-18.
    let depth = if tol < 1e-12 { 600 } else { 300 };
    tau_prime_powers(set, p, depth)
}

/// The closed form `prod_{a in A'} (1 - p^{-1 + a_hat - a}) sum_j tau_{A'}(p^{j+r}) p^{-j(1 - a_hat)}`.
pub fn g_closed_form(a: &ShiftSet, ia: usize, p: u64, r: usize, tol: f64) -> Result<Complex64> {
    let alpha_hat = a.as_slice()[ia];
    let rest = a.without(ia);
    let pf = p as f64;
    let pre: Complex64 = rest.iter().map(|x| ONE - pow_neg(pf, ONE - alpha_hat + x)).product();
    let h = tau_rows(&rest, p, tol);
    Ok(pre * shifted_tau_series(&h, r, pow_neg(pf, ONE - alpha_hat), tol)?)
}

/// Literal `G_A(1 - a_hat, p^r)` together with the magnitude of its two
/// ingredients.
fn g_literal(cache: &mut GCache, p: u64, r: usize) -> Result<(Complex64, f64)> {
    let s = cache.s();
    // G(s, 1) = 1: the empty factorization, not p^0
    let factors: &[(u64, u32)] = if r == 0 { &[] } else { &[(p, r as u32)] };
    let value = euler::g_big_with(s, factors, |q, e| cache.local(q, e))?;
    let scale = if r == 0 {
        1.0
    } else {
        let pf = p as f64;
        let ps = pow_neg(pf, -s);
        (cache.local(p, r)? * (pf / (pf - 1.0))).norm() + (ps * cache.local(p, r - 1)? / (pf - 1.0)).norm()
    };
    Ok((value, scale))
}

fn g_cache(set: &ShiftSet, hat: Complex64, p: u64) -> Result<GCache> {
    let mut cache = GCache::new(set, ONE - hat);
    cache.prefill(&[p], G_ROWS)?;
    Ok(cache)
}

/// `G_A(1 - a_hat, p^r)` from the double divisor sum against the closed form,
/// `1 <= r <= R`.
pub fn check_g_closed_form(a: &ShiftSet, ia: usize, p: u64, opts: &CheckOptions) -> Result<CheckReport> {
    if ia >= a.len() {
        return Err(Error::invalid(format!("index {ia} out of range for a set of size {}", a.len())));
    }
    let mut report = CheckReport::new("G_closed_form");
    let mut cache = g_cache(a, a.as_slice()[ia], p)?;
    for r in 1..=opts.depth {
        let (lit, scale) = g_literal(&mut cache, p, r)?;
        let closed = g_closed_form(a, ia, p, r, opts.series_tol)?;
        report.push(format!("r = {r}"), residual(lit, closed, scale));
    }
    Ok(report)
}

/// `sum_j tau_S(p^j) tau_T(p^j) p^{-j}`.
fn theta_sum(s: &ShiftSet, t: &ShiftSet, p: u64, tol: f64) -> Result<Complex64> {
    let hs = tau_rows(s, p, tol);
    let ht = tau_rows(t, p, tol);
    let inv = 1.0 / p as f64;
    let mut scale = 1.0;
    sum_series(
        |j| {
            let (Some(x), Some(y)) = (hs.get(j), ht.get(j)) else {
                return Err(Error::Divergent("tau table exhausted".into()));
            };
            let v = x * y * scale;
            scale *= inv;
            Ok(v)
        },
        tol,
        "theta series",
    )
}

/// Both sides of the local identity at `s = 0`, and its shifted form at each
/// point of `s_points`.
///
/// At `s = 0` the left side is
/// `prod_{a in A'} (1 - p^{-1 - a + a_hat}) prod_{b in B'} (1 - p^{-1 + b_hat - b})
///  (1 - p^{-1 + a_hat + b_hat}) sum_j tau_{A' + {-b_hat}}(p^j) tau_{B' + {-a_hat}}(p^j) p^{-j}`
/// and the right side is
/// `sum_{d, q} mu(p^q) G_A(1 - a_hat, p^{d+q}) G_B(1 - b_hat, p^{d+q}) p^{-d - q(2 - a_hat - b_hat)}`.
/// The shifted form compares [`euler::local_a_hat`] with
/// [`euler::local_a_factor`] on the swapped sets.
pub fn check_local_identity(
    a: &ShiftSet,
    b: &ShiftSet,
    ia: usize,
    ib: usize,
    p: u64,
    s_points: &[Complex64],
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let pair = SwapPair::new(a, b, ia, ib)?;
    let (ah, bh) = (pair.alpha_hat, pair.beta_hat);
    let pf = p as f64;
    let mut report = CheckReport::new("local_identity");

    let mut pre = ONE - pow_neg(pf, ONE - ah - bh);
    for x in pair.a_rest.iter() {
        pre *= ONE - pow_neg(pf, ONE + x - ah);
    }
    for y in pair.b_rest.iter() {
        pre *= ONE - pow_neg(pf, ONE + y - bh);
    }
    let lhs = pre * theta_sum(&pair.a_rest.with(-bh), &pair.b_rest.with(-ah), p, opts.series_tol)?;

    let mut ga = g_cache(a, ah, p)?;
    let mut gb = g_cache(b, bh, p)?;
    let q_factor = pow_neg(pf, Complex64::new(2.0, 0.0) - ah - bh);
    let mut ga_rows = Vec::new();
    let mut gb_rows = Vec::new();
    let mut p_d = 1.0;
    let rhs = sum_series(
        |d| {
            while ga_rows.len() < d + 2 {
                let r = ga_rows.len();
                ga_rows.push(g_literal(&mut ga, p, r)?.0);
                gb_rows.push(g_literal(&mut gb, p, r)?.0);
            }
            let t = (ga_rows[d] * gb_rows[d] - q_factor * ga_rows[d + 1] * gb_rows[d + 1]) * p_d;
            p_d /= pf;
            Ok(t)
        },
        opts.series_tol,
        "G double sum",
    )?;
    report.push("s = 0", residual(lhs, rhs, 0.0));

    for &s in s_points {
        let hat = euler::local_a_hat(a, b, ia, ib, s, p)?.value;
        let (sa, sb) = pair.swapped_sets(s);
        let direct = euler::local_a_factor(&sa, &sb, p)?.value;
        report.push(format!("s = {s}"), residual(hat, direct, 0.0));
    }
    Ok(report)
}

/// The steps from the `G` double sum to the `tau` series, term by term for
/// `d, r <= R` and as full series where the step rearranges a sum.
pub fn check_intermediate_telescoping(
    a: &ShiftSet,
    b: &ShiftSet,
    ia: usize,
    ib: usize,
    p: u64,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let pair = SwapPair::new(a, b, ia, ib)?;
    let (ah, bh) = (pair.alpha_hat, pair.beta_hat);
    let pf = p as f64;
    let tol = opts.series_tol;
    let r_max = opts.depth;
    let mut report = CheckReport::new("telescoping");

    let mut ca = g_cache(a, ah, p)?;
    let mut cb = g_cache(b, bh, p)?;
    let mut ga = Vec::new();
    let mut gb = Vec::new();
    // magnitudes of the terms inside each literal G
    let mut sa = Vec::new();
    let mut sb = Vec::new();
    for r in 0..=r_max + 1 {
        let (v, sc) = g_literal(&mut ca, p, r)?;
        ga.push(v);
        sa.push(sc);
        let (v, sc) = g_literal(&mut cb, p, r)?;
        gb.push(v);
        sb.push(sc);
    }
    let xa = pow_neg(pf, ONE - ah); // p^{-1 + a_hat}
    let xb = pow_neg(pf, ONE - bh);

    // (i) splitting of G_A G_B - p^{-2 + a_hat + b_hat} G_A G_B
    for d in 0..=r_max {
        let lhs = ga[d] * gb[d] - xa * xb * ga[d + 1] * gb[d + 1];
        let rhs = (ga[d] - xa * ga[d + 1]) * gb[d] + xa * ga[d + 1] * (gb[d] - xb * gb[d + 1]);
        let scale = (ga[d] * gb[d]).norm() + (xa * xb * ga[d + 1] * gb[d + 1]).norm();
        report.push(format!("split d = {d}"), residual(lhs, rhs, scale));
    }

    // (ii) G(p^d) - p^{-1 + hat} G(p^{d+1}) = prod (1 - p^{-1 + hat - x}) tau_{rest}(p^d)
    let ta = tau_prime_powers(&pair.a_rest, p, r_max + 1);
    let tb = tau_prime_powers(&pair.b_rest, p, r_max + 1);
    let pre_a: Complex64 = pair.a_rest.iter().map(|x| ONE - pow_neg(pf, ONE - ah + x)).product();
    let pre_b: Complex64 = pair.b_rest.iter().map(|y| ONE - pow_neg(pf, ONE - bh + y)).product();
    for d in 0..=r_max {
        let diff = ga[d] - xa * ga[d + 1];
        let scale = sa[d] + xa.norm() * sa[d + 1];
        report.push(format!("G difference A, d = {d}"), residual(diff, pre_a * ta[d], scale));
        let diff = gb[d] - xb * gb[d + 1];
        let scale = sb[d] + xb.norm() * sb[d + 1];
        report.push(format!("G difference B, d = {d}"), residual(diff, pre_b * tb[d], scale));
    }

    // (iii) the nested d, j sums rearranged by r = d + j
    let ha = tau_rows(&pair.a_rest, p, tol);
    let hb = tau_rows(&pair.b_rest, p, tol);
    let yb = pow_neg(pf, ONE - bh); // p^{-(1 - b_hat)}
    let ya = pow_neg(pf, ONE - ah);
    let mut p_d = 1.0;
    let nested = sum_series(
        |d| {
            let t = ha[d] * p_d * shifted_tau_series(&hb, d, yb, tol)?;
            p_d /= pf;
            Ok(t)
        },
        tol,
        "nested d, j sum",
    )?;
    let by_r = theta_sum(&pair.b_rest, &pair.a_rest.with(-bh), p, tol)?;
    report.push("rearranged first term", residual(nested, by_r, 0.0));

    let mut p_d = 1.0;
    let nested = sum_series(
        |d| {
            let t = hb[d] * p_d * shifted_tau_series(&ha, d + 1, ya, tol)?;
            p_d /= pf;
            Ok(t)
        },
        tol,
        "nested d, j sum",
    )? * xa;
    let with_hat = theta_sum(&pair.a_rest, &pair.b_rest.with(-ah), p, tol)?;
    let without = theta_sum(&pair.a_rest, &pair.b_rest, p, tol)?;
    let scale = with_hat.norm() + without.norm();
    report.push("rearranged second term", residual(nested, with_hat - without, scale));

    // (iv) the three tau products telescope
    let u = pair.a_rest.with(-bh);
    let v = pair.b_rest.with(-ah);
    let tu = tau_prime_powers(&u, p, r_max);
    let tv = tau_prime_powers(&v, p, r_max);
    let pab = pow_neg(pf, -(ah + bh));
    for r in 0..=r_max {
        let lhs = tb[r] * tu[r] + ta[r] * tv[r] - ta[r] * tb[r];
        let (rhs, mut scale) = if r == 0 {
            (tu[0] * tv[0], 1.0)
        } else {
            let back = pab * tu[r - 1] * tv[r - 1];
            (tu[r] * tv[r] - back, (tu[r] * tv[r]).norm() + back.norm())
        };
        scale += (tb[r] * tu[r]).norm() + (ta[r] * tv[r]).norm() + (ta[r] * tb[r]).norm();
        report.push(format!("telescope r = {r}"), residual(lhs, rhs, scale));
    }

    // the G double sum equals the telescoped tau series
    let mut p_d = 1.0;
    let goal = sum_series(
        |d| {
            while ga.len() < d + 2 {
                let r = ga.len();
                ga.push(g_literal(&mut ca, p, r)?.0);
                gb.push(g_literal(&mut cb, p, r)?.0);
            }
            let t = (ga[d] * gb[d] - xa * xb * ga[d + 1] * gb[d + 1]) * p_d;
            p_d /= pf;
            Ok(t)
        },
        tol,
        "G double sum",
    )?;
    let hu = tau_rows(&u, p, tol);
    let hv = tau_rows(&v, p, tol);
    let mut p_r = 1.0;
    let telescoped = sum_series(
        |r| {
            if r >= hu.len() {
                return Err(Error::Divergent("tau table exhausted".into()));
            }
            let t = if r == 0 { ONE } else { (hu[r] * hv[r] - pab * hu[r - 1] * hv[r - 1]) * p_r };
            p_r /= pf;
            Ok(t)
        },
        tol,
        "telescoped series",
    )?;
    report.push("goal", residual(goal, pre_a * pre_b * telescoped, 0.0));
    Ok(report)
}

/// `A_p(A_w, B_z)` against `A_p(A_{w+z}, B)`.
pub fn check_translation_identity(a: &ShiftSet, b: &ShiftSet, w: Complex64, z: Complex64, p: u64) -> Result<CheckReport> {
    let mut report = CheckReport::new("translation");
    let lhs = euler::local_a_factor(&a.translate(w), &b.translate(z), p)?.value;
    let rhs = euler::local_a_factor(&a.translate(w + z), b, p)?.value;
    report.push(format!("p = {p}"), residual(lhs, rhs, 0.0));
    Ok(report)
}

/// The global form of [`check_translation_identity`] over primes `<= bound`.
pub fn check_translation_global(a: &ShiftSet, b: &ShiftSet, w: Complex64, z: Complex64, bound: u64) -> Result<CheckReport> {
    let mut report = CheckReport::new("translation_global");
    let lhs = euler::global_a(&a.translate(w), &b.translate(z), bound)?.value;
    let rhs = euler::global_a(&a.translate(w + z), b, bound)?.value;
    report.push(format!("P = {bound}"), residual(lhs, rhs, 0.0));
    Ok(report)
}

/// Truncated Dirichlet series against the Euler product.
#[derive(Debug, Clone, Serialize)]
pub struct DirichletReport {
    pub s: Complex64,
    #[serde(rename = "N")]
    pub terms: u64,
    #[serde(rename = "P")]
    pub prime_bound: u64,
    pub truncated_sum: Complex64,
    /// Estimate of `sum_{n > N}`.
    pub sum_tail_estimate: f64,
    pub euler_value: Complex64,
    pub euler_error_estimate: f64,
    pub gap: f64,
    pub within_estimates: bool,
}

/// `sum_{n <= N} tau_A(n) tau_B(n) n^{-1-s}` against `A(A_s, B) Z(A_s, B)`.
///
/// The sum's tail is estimated from the mean of `|tau_A tau_B|` over
/// `(N/2, N]`, assuming that mean grows like `(log n)^{kl - 1}`:
/// `2 m N^{-sigma} / sigma (1 + (kl - 1) / (sigma log N))`. The leading 2 is
/// a safety factor.
pub fn check_dirichlet_series(a: &ShiftSet, b: &ShiftSet, s: Complex64, n: u64, bound: u64) -> Result<DirichletReport> {
    if s.re < 1.0 {
        return Err(Error::domain(format!("the Dirichlet series check needs Re s >= 1, got {s}")));
    }
    if n < 2 {
        return Err(Error::invalid("N must be at least 2"));
    }
    let ta = ShiftedTauTable::build(a, n as usize)?;
    let tb = ShiftedTauTable::build(b, n as usize)?;
    let term = |k: u64| {
        let kf = k as f64;
        ta.get(k as usize) * tb.get(k as usize) * (-(ONE + s) * kf.ln()).exp()
    };
    let total = chunked_sum(1, n + 1, 1 << 14, |lo, hi| {
        let mut acc = CompensatedSum::new();
        for k in lo..hi {
            acc.add(term(k));
        }
        acc.value()
    });
    let mut mean = CompensatedSum::new();
    for k in n / 2 + 1..=n {
        mean.add_real((ta.get(k as usize) * tb.get(k as usize)).norm());
    }
    let m = mean.value().re / (n - n / 2) as f64;
    let sigma = s.re;
    let nf = n as f64;
    let kl = (a.len() * b.len()) as f64;
    let sum_tail = 2.0 * m * nf.powf(-sigma) / sigma * (1.0 + (kl - 1.0).max(0.0) / (sigma * nf.ln()));

    let (value, prod) = euler::a_times_z(&a.translate(s), b, bound)?;
    let euler_err = prod.error_estimate() * (value.norm() / prod.value.norm().max(f64::MIN_POSITIVE));
    let gap = (total - value).norm();
    Ok(DirichletReport {
        s,
        terms: n,
        prime_bound: bound,
        truncated_sum: total,
        sum_tail_estimate: sum_tail,
        euler_value: value,
        euler_error_estimate: euler_err,
        gap,
        within_estimates: gap <= sum_tail + euler_err,
    })
}

/// Parameters of one random draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub index: u64,
    pub a: ShiftSet,
    pub b: ShiftSet,
    pub ia: usize,
    pub ib: usize,
    pub p: u64,
    /// Translation amounts for the translation identity.
    pub w: Complex64,
    pub z: Complex64,
}

fn disk_point(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    let t = 2.0 * PI * rng.gen::<f64>();
    Complex64::from_polar(r, t)
}

fn draw_set(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<Complex64> {
    let len = rng.gen_range(1..=max_len);
    let mut out: Vec<Complex64> = Vec::with_capacity(len);
    while out.len() < len {
        let x = disk_point(rng, DRAW_RADIUS);
        if out.iter().all(|y| (x - y).norm() >= DRAW_SEPARATION) {
            out.push(x);
        }
    }
    out
}

impl Draw {
    /// Draw `index` of the stream seeded by `seed`; sets have at most
    /// `max_len` entries.
    pub fn generate(seed: u64, index: u64, max_len: usize) -> Result<Draw> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        loop {
            let a = draw_set(&mut rng, max_len);
            let b = draw_set(&mut rng, max_len);
            // keep every zeta(1 + a + b) away from its pole
            if a.iter().any(|x| b.iter().any(|y| (x + y).norm() < DRAW_SEPARATION)) {
                continue;
            }
            let ia = rng.gen_range(0..a.len());
            let ib = rng.gen_range(0..b.len());
            let p = DRAW_PRIMES[rng.gen_range(0..DRAW_PRIMES.len())];
            let w = disk_point(&mut rng, DRAW_RADIUS);
            let z = disk_point(&mut rng, DRAW_RADIUS);
            return Ok(Draw {
                index,
                a: ShiftSet::new(a)?,
                b: ShiftSet::new(b)?,
                ia,
                ib,
                p,
                w,
                z,
            });
        }
    }

    /// All prime-local checks for this draw.
    pub fn run(&self, opts: &CheckOptions) -> Result<Vec<CheckReport>> {
        let s_grid: Vec<Complex64> = S_GRID.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let pair = SwapPair::new(&self.a, &self.b, self.ia, self.ib)?;
        let mut tau = check_tauid(&self.a, self.p, opts)?;
        tau.residuals.extend(check_tauid(&self.b, self.p, opts)?.residuals);
        let mut g = check_g_closed_form(&self.a, self.ia, self.p, opts)?;
        g.residuals.extend(check_g_closed_form(&self.b, self.ib, self.p, opts)?.residuals);
        Ok(vec![
            tau,
            check_convolution_id(&pair.a_rest, pair.beta_hat, self.p, opts)?,
            g,
            check_local_identity(&self.a, &self.b, self.ia, self.ib, self.p, &s_grid, opts)?,
            check_intermediate_telescoping(&self.a, &self.b, self.ia, self.ib, self.p, opts)?,
            check_translation_identity(&self.a, &self.b, self.w, self.z, self.p)?,
        ])
    }
}

/// Settings for a batch of random draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub draws: u64,
    pub max_set_len: usize,
    pub options: CheckOptions,
    /// Pass threshold for the prime-local identities.
    pub tolerance: f64,
    /// Pass threshold for the local translation identity.
    pub translation_tolerance: f64,
    /// Prime bound and draw count for the global translation identity
    /// (`global_draws = 0` skips it).
    pub global_bound: u64,
    pub global_draws: u64,
    pub global_tolerance: f64,
    /// Draws to rerun verbatim (reproducers); they are added to the random ones.
    #[serde(default)]
    pub replay: Vec<Draw>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 7,
            draws: 100,
            max_set_len: 3,
            options: CheckOptions::default(),
            tolerance: 1e-9,
            translation_tolerance: 1e-12,
            global_bound: 10_000,
            global_draws: 3,
            global_tolerance: 1e-9,
            replay: Vec::new(),
        }
    }
}

/// Residual statistics of one identity over all draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentitySummary {
    pub identity: String,
    pub checks: u64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// A failing draw with the config that reruns it alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproducer {
    pub identity: String,
    pub residual: f64,
    pub config: SuiteConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub identities: Vec<IdentitySummary>,
    pub failures: Vec<Reproducer>,
    pub errors: Vec<String>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn max_residual(&self) -> f64 {
        self.identities.iter().map(|s| s.max_residual).fold(0.0, f64::max)
    }
}

fn tolerance_for(cfg: &SuiteConfig, identity: &str) -> f64 {
    match identity {
        "translation" => cfg.translation_tolerance,
        "translation_global" => cfg.global_tolerance,
        _ => cfg.tolerance,
    }
}

/// Runs every draw (in parallel) and merges the reports by draw index.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut draws = (0..cfg.draws)
        .map(|i| Draw::generate(cfg.seed, i, cfg.max_set_len))
        .collect::<Result<Vec<_>>>()?;
    draws.extend(cfg.replay.iter().cloned());
    let results = par_map(&draws, |d| d.run(&cfg.options));

    let globals: Vec<&Draw> = draws.iter().take(cfg.global_draws as usize).collect();
    let global_results = par_map(&globals, |d| check_translation_global(&d.a, &d.b, d.w, d.z, cfg.global_bound));

    let mut order: Vec<String> = Vec::new();
    let mut stats: std::collections::BTreeMap<String, (u64, f64, f64)> = Default::default();
    let mut failures = Vec::new();
    let mut errors = Vec::new();
    let mut record = |draw: &Draw, report: &CheckReport| {
        if !stats.contains_key(&report.identity) {
            order.push(report.identity.clone());
        }
        let entry = stats.entry(report.identity.clone()).or_insert((0, 0.0, 0.0));
        entry.0 += report.residuals.len() as u64;
        entry.1 = entry.1.max(report.max());
        entry.2 += report.residuals.iter().map(|r| r.value).sum::<f64>();
        let tol = tolerance_for(cfg, &report.identity);
        if !(report.max() <= tol) {
            failures.push(Reproducer {
                identity: report.identity.clone(),
                residual: report.max(),
                config: SuiteConfig {
                    draws: 0,
                    global_draws: 0,
                    replay: vec![draw.clone()],
                    ..cfg.clone()
                },
            });
        }
    };
    for (draw, result) in draws.iter().zip(&results) {
        match result {
            Ok(reports) => reports.iter().for_each(|r| record(draw, r)),
            Err(e) => errors.push(format!("draw {}: {e}", draw.index)),
        }
    }
    for (draw, result) in globals.iter().zip(&global_results) {
        match result {
            Ok(r) => record(draw, r),
            Err(e) => errors.push(format!("draw {} (global): {e}", draw.index)),
        }
    }
    let identities: Vec<IdentitySummary> = order
        .into_iter()
        .map(|name| {
            let (checks, max, total) = stats[&name];
            let tol = tolerance_for(cfg, &name);
            IdentitySummary {
                passed: max <= tol,
                mean_residual: if checks > 0 { total / checks as f64 } else { 0.0 },
                identity: name,
                checks,
                max_residual: max,
                tolerance: tol,
            }
        })
        .collect();
    let passed = errors.is_empty() && identities.iter().all(|s| s.passed);
    Ok(SuiteReport {
        identities,
        failures,
        errors,
        passed,
    })
}
