//! Smoothed mean squares of Dirichlet polynomials,
//! `I(T; X) = T sum_{m, n <= X} tau_A(m) tau_B(n) psi_hat((T / 2 pi) log(m / n)) / sqrt(mn)`,
//! and the report comparing them with the conjectured value.
//!
//! `psi_hat` is negligible beyond its cutoff `Xi`, so only pairs with
//! `|log(m / n)| < 2 pi Xi / T` are visited. For each `m` the admissible `n`
//! form a window whose left end moves monotonically with `m`.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divisor::ShiftedTauTable;
use crate::error::{Error, Result};
use crate::recipe::{conjectured_i, ConjecturedI};
use crate::shifts::ShiftSet;
use crate::special::weight::{SmoothWeight, WeightDescriptor};
use crate::sum::{par_map, CompensatedSum};

const CHUNK: usize = 4096;

/// `I(T; X)` with work counters.
#[derive(Debug, Clone, Serialize)]
pub struct MomentValue {
    pub value: Complex64,
    pub diagonal: Complex64,
    /// Ordered pairs `m > n` inside the band.
    pub pair_visits: u64,
    pub predicted_visits: f64,
    pub warnings: Vec<String>,
}

/// Pairs `m > n`, `n <= X`, with `log(m / n) < width`, from the band formula.
pub fn predicted_pair_visits(x: u64, width: f64) -> f64 {
    let frac = -(-width).exp_m1();
    let xf = x as f64;
    // sum_{m <= X} min(m - 1, frac * m)
    let full = (1.0 / frac).min(xf);
    let head = full * (full - 1.0) / 2.0;
    head + frac * (xf * (xf + 1.0) - full * (full + 1.0)) / 2.0
}

/// `I(T; X)` over the tables' first `X` entries.
pub fn i_empirical(
    table_a: &ShiftedTauTable,
    table_b: &ShiftedTauTable,
    big_t: f64,
    x: u64,
    weight: &SmoothWeight,
) -> Result<MomentValue> {
    if !(big_t > 0.0) {
        return Err(Error::invalid("T must be positive"));
    }
    table_a.ensure_covers(x)?;
    table_b.ensure_covers(x)?;
    let n = x as usize;
    let kappa = big_t / (2.0 * PI);
    let width = weight.cutoff() / kappa;
    let mut warnings = Vec::new();
    if (x as f64) * (-(-width).exp_m1()) > x as f64 * 0.999 {
        warnings.push("band covers every pair; the sum is quadratic in X".to_string());
    }

    // index 0 unused
    let logs: Vec<f64> = (0..=n).map(|k| if k == 0 { 0.0 } else { (k as f64).ln() * kappa }).collect();
    let scale = |k: usize| 1.0 / (k as f64).sqrt();
    let av: Vec<Complex64> = (0..=n).map(|k| if k == 0 { Complex64::default() } else { table_a.get(k) * scale(k) }).collect();
    let bv: Vec<Complex64> = (0..=n).map(|k| if k == 0 { Complex64::default() } else { table_b.get(k) * scale(k) }).collect();

    let mut diag = CompensatedSum::new();
    for k in 1..=n {
        diag.add(av[k] * bv[k]);
    }

    let cutoff = weight.cutoff();
    let chunks: Vec<(usize, usize)> = (2..=n).step_by(CHUNK).map(|lo| (lo, (lo + CHUNK).min(n + 1))).collect();
    let partials = par_map(&chunks, |&(lo, hi)| {
        let mut acc = CompensatedSum::new();
        let mut visits = 0u64;
        // first n with logs[m] - logs[n] < cutoff
        let mut start = 1usize;
        for m in lo..hi {
            let lm = logs[m];
            while lm - logs[start] >= cutoff {
                start += 1;
            }
            let mut sb = Complex64::default();
            let mut sa = Complex64::default();
            for k in start..m {
                let v = weight.psi_hat_nonneg(lm - logs[k]);
                sb += bv[k] * v;
                sa += av[k] * v.conj();
            }
            visits += (m - start) as u64;
            acc.add(av[m] * sb + bv[m] * sa);
        }
        (acc.value(), visits)
    });
    let mut off = CompensatedSum::new();
    let mut visits = 0u64;
    for (v, c) in partials {
        off.add(v);
        visits += c;
    }
    let diagonal = diag.value() * (big_t * weight.psi_hat_zero());
    let mut total = CompensatedSum::new();
    total.add(diagonal);
    total.add(off.value() * big_t);
    Ok(MomentValue {
        value: total.value(),
        diagonal,
        pair_visits: visits,
        predicted_visits: predicted_pair_visits(x, width),
        warnings,
    })
}

/// Parameters of a moment experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentJob {
    pub a: ShiftSet,
    pub b: ShiftSet,
    #[serde(rename = "T")]
    pub big_t: f64,
    #[serde(rename = "X")]
    pub x: u64,
    /// Prime bound for the Euler products.
    #[serde(rename = "P")]
    pub prime_bound: u64,
}

impl MomentJob {
    pub fn validate(&self) -> Result<()> {
        if !(self.big_t > 1.0 && self.big_t.is_finite()) {
            return Err(Error::invalid("T must be a finite number above 1"));
        }
        if self.x < 1 {
            return Err(Error::invalid("X must be at least 1"));
        }
        if self.prime_bound < 2 {
            return Err(Error::invalid("P must be at least 2"));
        }
        Ok(())
    }
}

/// A labelled error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub label: String,
    pub value: f64,
}

/// Everything a moment run produced.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub version: &'static str,
    pub config: MomentJob,
    #[serde(rename = "N")]
    pub table_size: u64,
    pub weight: WeightDescriptor,
    pub empirical: Complex64,
    pub conjectured: ConjecturedI,
    pub abs_dev: f64,
    pub rel_dev: f64,
    pub pair_visits: u64,
    pub error_estimates: Vec<ErrorEstimate>,
    pub warnings: Vec<String>,
    /// Seconds per phase; excluded from [`ExperimentReport::payload`].
    pub timing: Vec<(String, f64)>,
}

impl ExperimentReport {
    /// The report as JSON without the timing fields.
    pub fn payload(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).unwrap_or(serde_json::Value::Null);
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timing");
        }
        v
    }
}

/// Runs `I_empirical` and the conjectured value with shared tables.
pub fn i_report(job: &MomentJob, weight: &SmoothWeight) -> Result<ExperimentReport> {
    job.validate()?;
    let mut timing = Vec::new();
    let clock = Instant::now();
    let ta = ShiftedTauTable::build(&job.a, job.x as usize)?;
    let tb = ShiftedTauTable::build(&job.b, job.x as usize)?;
    timing.push(("tables".to_string(), clock.elapsed().as_secs_f64()));

    let clock = Instant::now();
    let emp = i_empirical(&ta, &tb, job.big_t, job.x, weight)?;
    timing.push(("empirical".to_string(), clock.elapsed().as_secs_f64()));

    let clock = Instant::now();
    let conj = conjectured_i(&job.a, &job.b, job.big_t, job.x as f64, weight, job.prime_bound, &ta, &tb)?;
    timing.push(("conjectured".to_string(), clock.elapsed().as_secs_f64()));

    let abs_dev = (emp.value - conj.value).norm();
    let rel_dev = if conj.value.norm() > 0.0 { abs_dev / conj.value.norm() } else { f64::INFINITY };
    let error_estimates = vec![
        ErrorEstimate {
            label: "psi_hat band threshold".into(),
            value: weight.threshold() * job.big_t * emp.pair_visits as f64 / job.x.max(1) as f64,
        },
        ErrorEstimate {
            label: "one-swap contour remainder".into(),
            value: conj.remainder_total,
        },
        ErrorEstimate {
            label: "Euler product truncation".into(),
            value: conj.euler_error_total,
        },
    ];
    Ok(ExperimentReport {
        version: crate::VERSION,
        config: job.clone(),
        table_size: job.x,
        weight: weight.descriptor(),
        empirical: emp.value,
        conjectured: conj,
        abs_dev,
        rel_dev,
        pair_visits: emp.pair_visits,
        error_estimates,
        warnings: emp.warnings,
        timing,
    })
}
