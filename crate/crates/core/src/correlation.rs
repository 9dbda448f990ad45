//! Shifted divisor correlations `D(u, h) = sum_{n <= u} tau_A(n) tau_B(n + h)`
//! and their conjectured main term.
//!
//! `P_A(u, q)` is the average density of `tau_A(n) e(n / q)`:
//!
//! ```text
//! P_A(u, q) = sum_{a in A} G_A(1 - a, q) (u / q)^{-a} prod_{a' in A, a' != a} zeta(1 - a + a')
//! ```
//!
//! and `f(u, d) = sum_q mu(q) q^{-2} P_A(u, qd) P_B(u, qd)`,
//! `m'(u, h) = sum_{d | h} f(u, d) / d`, `m(u, h) = int_1^u m'(t, h) dt`.
//!
//! Every `u`-dependence is a power `u^{-a-b}`, so `f` is stored as a short
//! list of exponents with coefficients and `m` is integrated from those.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divisor::ShiftedTauTable;
use crate::error::{Error, Result};
use crate::euler::{g_big_with, GCache};
use crate::shifts::ShiftSet;
use crate::special::quad::GaussLegendre;
use crate::special::sieve::{divisors, factorize, primes_up_to, ArithmeticSieve};
use crate::special::zeta::zeta;
use crate::sum::{chunked_sum, csum, par_map, CompensatedSum};

/// Exponent in the admissible range `h <= u^{1 - EPSILON}`.
pub const EPSILON: f64 = 0.1;
/// Smallest accepted q-sum cutoff.
pub const MIN_Q_CUTOFF: usize = 50;
/// Minimum spacing between shifts of one set (poles of `P_A` must be simple).
pub const SIMPLE_POLE_SEPARATION: f64 = 1e-6;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Parameters of a correlation experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationJob {
    pub a: ShiftSet,
    pub b: ShiftSet,
    pub u_max: u64,
    pub h_list: Vec<u64>,
    pub q_cutoff: usize,
    /// Gauss–Legendre nodes per log-spaced panel for `m(u, h)`.
    pub quadrature_points: usize,
}

impl CorrelationJob {
    pub fn validate(&self) -> Result<()> {
        if self.u_max < 2 {
            return Err(Error::invalid("u_max must be at least 2"));
        }
        if self.h_list.is_empty() {
            return Err(Error::invalid("h_list is empty"));
        }
        let h_cap = (self.u_max as f64).powf(1.0 - EPSILON);
        for &h in &self.h_list {
            if h == 0 {
                return Err(Error::invalid("h = 0 is the diagonal; use the moment tools"));
            }
            if h as f64 > h_cap {
                return Err(Error::invalid(format!(
                    "h = {h} exceeds u^(1 - {EPSILON}) = {h_cap:.1} for u = {}",
                    self.u_max
                )));
            }
        }
        if self.q_cutoff < MIN_Q_CUTOFF {
            return Err(Error::invalid(format!(
                "q cutoff {} is below the minimum {MIN_Q_CUTOFF}",
                self.q_cutoff
            )));
        }
        if self.quadrature_points < 2 {
            return Err(Error::invalid("quadrature_points must be at least 2"));
        }
        check_simple(&self.a)?;
        check_simple(&self.b)
    }
}

fn check_simple(a: &ShiftSet) -> Result<()> {
    if a.is_empty() {
        return Err(Error::invalid("shift sets for P_A must be nonempty"));
    }
    if !a.is_simple(SIMPLE_POLE_SEPARATION) {
        return Err(Error::domain(format!(
            "shifts {:?} are not pairwise distinct; perturb repeated shifts by more than {SIMPLE_POLE_SEPARATION}",
            a.as_slice()
        )));
    }
    Ok(())
}

/// The residue data of `P_A`: for each `a in A` the factor
/// `prod_{a' != a} zeta(1 - a + a')` and a cache of the local factors of
/// `g_A(1 - a, .)`.
#[derive(Debug, Clone)]
pub struct DensityModel {
    set: ShiftSet,
    zeta_factors: Vec<Complex64>,
    caches: Vec<GCache>,
}

impl DensityModel {
    pub fn new(a: &ShiftSet) -> Result<Self> {
        check_simple(a)?;
        let shifts = a.as_slice();
        let mut zeta_factors = Vec::with_capacity(shifts.len());
        let mut caches = Vec::with_capacity(shifts.len());
        for (i, &ah) in shifts.iter().enumerate() {
            let mut z = ONE;
            for (j, &other) in shifts.iter().enumerate() {
                if i != j {
                    z *= zeta(ONE - ah + other)?;
                }
            }
            zeta_factors.push(z);
            caches.push(GCache::new(a, ONE - ah));
        }
        Ok(DensityModel {
            set: a.clone(),
            zeta_factors,
            caches,
        })
    }

    pub fn shifts(&self) -> &ShiftSet {
        &self.set
    }

    /// Precomputes the local factors needed for every `q <= limit`.
    pub fn prefill(&mut self, limit: u64) -> Result<()> {
        let primes: Vec<u64> = primes_up_to(limit as usize).into_iter().map(u64::from).collect();
        let r_max = (limit as f64).log2().floor() as usize + 1;
        for cache in &mut self.caches {
            cache.prefill(&primes, r_max)?;
        }
        Ok(())
    }

    /// `c_a(q)` with `P_A(u, q) = sum_a c_a(q) u^{-a}`; reads only
    /// prefilled local factors.
    pub fn coefficients(&self, q_factors: &[(u64, u32)]) -> Result<Vec<Complex64>> {
        let ln_q: f64 = q_factors.iter().map(|&(p, e)| e as f64 * (p as f64).ln()).sum();
        self.set
            .iter()
            .zip(&self.caches)
            .zip(&self.zeta_factors)
            .map(|((ah, cache), z)| {
                let g = g_big_with(cache.s(), q_factors, |p, r| cache.get(p, r))?;
                Ok(g * (ah * ln_q).exp() * z)
            })
            .collect()
    }

    /// `P_A(u, q)`.
    pub fn eval(&self, u: f64, q_factors: &[(u64, u32)]) -> Result<Complex64> {
        let c = self.coefficients(q_factors)?;
        Ok(csum(self.set.iter().zip(c).map(|(ah, c)| c * (-ah * u.ln()).exp())))
    }
}

/// `P_A(u, q)` for `u >= q >= 1`.
pub fn p_density(a: &ShiftSet, u: f64, q: u64, sieve: &ArithmeticSieve) -> Result<Complex64> {
    if q == 0 || !(u >= q as f64) {
        return Err(Error::invalid(format!("P_A(u, q) needs u >= q >= 1, got u = {u}, q = {q}")));
    }
    if q as usize > sieve.limit() {
        return Err(Error::Bounds {
            index: q,
            limit: sieve.limit() as u64,
        });
    }
    let mut model = DensityModel::new(a)?;
    model.prefill(q.max(2))?;
    model.eval(u, &sieve.factorize(q as usize))
}

/// `f(u, d)` as `sum_i coeffs[i] u^{-exponents[i]}`.
#[derive(Debug, Clone, Serialize)]
pub struct FTerms {
    pub d: u64,
    pub exponents: Vec<Complex64>,
    pub coeffs: Vec<Complex64>,
    /// Contribution of `q` in `(Q/10, Q]`, per exponent.
    pub last_decade: Vec<Complex64>,
}

impl FTerms {
    fn build(a: &DensityModel, b: &DensityModel, d: u64, q_cutoff: usize, sieve: &ArithmeticSieve) -> Result<Self> {
        let qs: Vec<(u64, i8)> = (1..=q_cutoff as u64)
            .filter_map(|q| match sieve.mobius(q as usize) {
                0 => None,
                mu => Some((q, mu)),
            })
            .collect();
        let d_factors = factorize(d);
        let products = par_map(&qs, |&(q, mu)| -> Result<Vec<Complex64>> {
            let mut f = sieve.factorize(q as usize);
            for &(p, e) in &d_factors {
                match f.iter_mut().find(|(pp, _)| *pp == p) {
                    Some(entry) => entry.1 += e,
                    None => f.push((p, e)),
                }
            }
            let ca = a.coefficients(&f)?;
            let cb = b.coefficients(&f)?;
            let w = mu as f64 / (q as f64 * q as f64);
            Ok(ca.iter().flat_map(|x| cb.iter().map(move |y| x * y * w)).collect())
        });
        let n_terms = a.set.len() * b.set.len();
        let mut sums = vec![CompensatedSum::new(); n_terms];
        let mut last = vec![CompensatedSum::new(); n_terms];
        let decade = q_cutoff as u64 / 10;
        for (&(q, _), prod) in qs.iter().zip(products) {
            let prod = prod?;
            for (i, v) in prod.into_iter().enumerate() {
                sums[i].add(v);
                if q > decade {
                    last[i].add(v);
                }
            }
        }
        let exponents = a.set.iter().flat_map(|x| b.set.iter().map(move |y| x + y)).collect();
        Ok(FTerms {
            d,
            exponents,
            coeffs: sums.iter().map(|s| s.value()).collect(),
            last_decade: last.iter().map(|s| s.value()).collect(),
        })
    }

    pub fn eval(&self, u: f64) -> Complex64 {
        let l = u.ln();
        csum(self.exponents.iter().zip(&self.coeffs).map(|(w, c)| c * (-w * l).exp()))
    }

    pub fn truncation_estimate(&self, u: f64) -> f64 {
        let l = u.ln();
        csum(self.exponents.iter().zip(&self.last_decade).map(|(w, c)| c * (-w * l).exp())).norm()
    }

    /// `int_1^u` of [`FTerms::eval`], in closed form.
    pub fn integral(&self, u: f64) -> Complex64 {
        let l = u.ln();
        csum(self.exponents.iter().zip(&self.coeffs).map(|(w, c)| {
            let e = ONE - w;
            if e.norm() < 1e-12 {
                c * l
            } else {
                c * (((e * l).exp()) - 1.0) / e
            }
        }))
    }
}

/// A value of `f(u, d)` with its q-truncation estimate.
#[derive(Debug, Clone, Serialize)]
pub struct FValue {
    pub value: Complex64,
    pub truncation: f64,
    pub warnings: Vec<String>,
}

/// `f(u, d)` with the q-sum cut at `q_cutoff`.
pub fn f_density(
    a: &ShiftSet,
    b: &ShiftSet,
    u: f64,
    d: u64,
    q_cutoff: usize,
    sieve: &ArithmeticSieve,
) -> Result<FValue> {
    if d == 0 {
        return Err(Error::invalid("f(u, d) needs d >= 1"));
    }
    let need = q_cutoff as u64 * d;
    if need as usize > sieve.limit() {
        return Err(Error::Bounds {
            index: need,
            limit: sieve.limit() as u64,
        });
    }
    let model = CorrelationModel::build(a, b, &[d], q_cutoff, sieve)?;
    let terms = &model.terms[&d];
    let mut warnings = Vec::new();
    if d as f64 > u {
        warnings.push(format!("d = {d} exceeds u = {u}; outside the calibrated range"));
    }
    Ok(FValue {
        value: terms.eval(u),
        truncation: terms.truncation_estimate(u),
        warnings,
    })
}

/// `f(., d)` for every `d` dividing some requested `h`, built once per job.
#[derive(Debug, Clone)]
pub struct CorrelationModel {
    pub q_cutoff: usize,
    pub terms: BTreeMap<u64, FTerms>,
}

/// `m(u, h)` with its closed-form cross-check and error estimates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MainTerm {
    pub value: Complex64,
    pub closed_form: Complex64,
    pub truncation: f64,
}

impl CorrelationModel {
    /// `sieve` must cover `q_cutoff * max(h)`.
    pub fn build(a: &ShiftSet, b: &ShiftSet, h_list: &[u64], q_cutoff: usize, sieve: &ArithmeticSieve) -> Result<Self> {
        let mut ds: Vec<u64> = h_list.iter().flat_map(|&h| divisors(h)).collect();
        ds.sort_unstable();
        ds.dedup();
        let d_max = ds.last().copied().unwrap_or(1);
        let limit = q_cutoff as u64 * d_max;
        if limit as usize > sieve.limit() {
            return Err(Error::Bounds {
                index: limit,
                limit: sieve.limit() as u64,
            });
        }
        let mut ma = DensityModel::new(a)?;
        let mut mb = DensityModel::new(b)?;
        ma.prefill(limit.max(2))?;
        mb.prefill(limit.max(2))?;
        let mut terms = BTreeMap::new();
        for d in ds {
            terms.insert(d, FTerms::build(&ma, &mb, d, q_cutoff, sieve)?);
        }
        Ok(CorrelationModel { q_cutoff, terms })
    }

    fn terms_for(&self, d: u64) -> Result<&FTerms> {
        self.terms
            .get(&d)
            .ok_or_else(|| Error::invalid(format!("model was not built for d = {d}")))
    }

    /// `f(u, d)`.
    pub fn f(&self, u: f64, d: u64) -> Result<Complex64> {
        Ok(self.terms_for(d)?.eval(u))
    }

    /// `m'(u, h) = sum_{d | h} f(u, d) / d`.
    pub fn m_prime(&self, u: f64, h: u64) -> Result<Complex64> {
        if h == 0 {
            return Err(Error::invalid("h = 0 is the diagonal; use the moment tools"));
        }
        let mut acc = CompensatedSum::new();
        for d in divisors(h) {
            acc.add(self.f(u, d)? / d as f64);
        }
        Ok(acc.value())
    }

    /// `m(u, h) = int_1^u m'(t, h) dt` by Gauss–Legendre quadrature with
    /// `points` nodes on each unit panel in `log t`.
    pub fn m_main(&self, u: f64, h: u64, points: usize) -> Result<MainTerm> {
        if h == 0 {
            return Err(Error::invalid("h = 0 is the diagonal; use the moment tools"));
        }
        if u < 1.0 {
            return Err(Error::invalid("m(u, h) needs u >= 1"));
        }
        let ds = divisors(h);
        let mut closed = CompensatedSum::new();
        let mut truncation = 0.0;
        for &d in &ds {
            let t = self.terms_for(d)?;
            closed.add(t.integral(u) / d as f64);
            truncation += t.truncation_estimate(u) * u / d as f64;
        }
        let total_log = u.ln();
        let panels = total_log.ceil().max(1.0) as usize;
        let width = total_log / panels as f64;
        let gl = GaussLegendre::new(points);
        let mut acc = CompensatedSum::new();
        for k in 0..panels {
            let lo = k as f64 * width;
            for (x, w) in gl.on(lo, lo + width) {
                let t = x.exp();
                acc.add(self.m_prime(t, h)? * (w * t));
            }
        }
        Ok(MainTerm {
            value: acc.value(),
            closed_form: closed.value(),
            truncation,
        })
    }
}

/// `D(u, h) = sum_{n <= u} tau_A(n) tau_B(n + h)`.
pub fn d_empirical(table_a: &ShiftedTauTable, table_b: &ShiftedTauTable, u: u64, h: u64) -> Result<Complex64> {
    if u as usize > table_a.limit() {
        return Err(Error::Bounds {
            index: u,
            limit: table_a.limit() as u64,
        });
    }
    if (u + h) as usize > table_b.limit() {
        return Err(Error::Bounds {
            index: u + h,
            limit: table_b.limit() as u64,
        });
    }
    let ta = table_a.raw();
    let tb = table_b.raw();
    Ok(chunked_sum(1, u + 1, 1 << 16, |lo, hi| {
        let mut acc = CompensatedSum::new();
        for n in lo as usize..hi as usize {
            acc.add(ta[n] * tb[n + h as usize]);
        }
        acc.value()
    }))
}

/// One `(u, h)` comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationRow {
    pub u: u64,
    pub h: u64,
    #[serde(rename = "D_real")]
    pub d_real: f64,
    #[serde(rename = "D_imag")]
    pub d_imag: f64,
    pub m_real: f64,
    pub m_imag: f64,
    pub rel_dev: f64,
}

/// Result of [`run_correlation`].
#[derive(Debug, Clone, Serialize)]
pub struct CorrelationResult {
    pub rows: Vec<CorrelationRow>,
    /// `|m - closed form|` per row, the quadrature check.
    pub quadrature_gap: Vec<f64>,
    /// q-truncation estimate of `m` per row.
    pub truncation: Vec<f64>,
}

impl CorrelationResult {
    pub fn mean_rel_dev(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_dev).sum::<f64>() / self.rows.len().max(1) as f64
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row).map_err(|e| Error::Format(e.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Tables of `tau_A` and `tau_B` long enough for a job.
pub fn job_tables(job: &CorrelationJob) -> Result<(ShiftedTauTable, ShiftedTauTable)> {
    let h_max = job.h_list.iter().copied().max().unwrap_or(0);
    let ta = ShiftedTauTable::build(&job.a, job.u_max as usize)?;
    let tb = ShiftedTauTable::build(&job.b, (job.u_max + h_max) as usize)?;
    Ok((ta, tb))
}

/// Runs a job against prebuilt tables and sieve.
pub fn run_correlation_with(
    job: &CorrelationJob,
    tables: &(ShiftedTauTable, ShiftedTauTable),
    sieve: &ArithmeticSieve,
) -> Result<CorrelationResult> {
    job.validate()?;
    let model = CorrelationModel::build(&job.a, &job.b, &job.h_list, job.q_cutoff, sieve)?;
    let u = job.u_max;
    let mut rows = Vec::new();
    let mut quadrature_gap = Vec::new();
    let mut truncation = Vec::new();
    for &h in &job.h_list {
        let d = d_empirical(&tables.0, &tables.1, u, h)?;
        let m = model.m_main(u as f64, h, job.quadrature_points)?;
        rows.push(CorrelationRow {
            u,
            h,
            d_real: d.re,
            d_imag: d.im,
            m_real: m.value.re,
            m_imag: m.value.im,
            rel_dev: (d - m.value).norm() / m.value.norm(),
        });
        quadrature_gap.push((m.value - m.closed_form).norm());
        truncation.push(m.truncation);
    }
    Ok(CorrelationResult {
        rows,
        quadrature_gap,
        truncation,
    })
}

/// Sieve limit needed by a job.
pub fn sieve_limit(job: &CorrelationJob) -> usize {
    job.q_cutoff * job.h_list.iter().copied().max().unwrap_or(1).max(1) as usize
}

/// Builds tables and sieve, then runs the job.
pub fn run_correlation(job: &CorrelationJob) -> Result<CorrelationResult> {
    job.validate()?;
    let sieve = ArithmeticSieve::build(sieve_limit(job))?;
    let tables = job_tables(job)?;
    run_correlation_with(job, &tables, &sieve)
}
