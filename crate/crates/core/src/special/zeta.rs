//! Riemann zeta and complex log-gamma.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

const EM_TERMS: usize = 40;

/// `B_{2k} / (2k)!` for `k = 1..=EM_TERMS`, from `2 zeta(2k) / (2 pi)^{2k}`.
fn em_coefficients() -> &'static [f64] {
    static COEFFS: OnceLock<Vec<f64>> = OnceLock::new();
    COEFFS.get_or_init(|| {
        (1..=EM_TERMS)
            .map(|k| {
                let z = if k == 1 { PI * PI / 6.0 } else { zeta_even_real(2 * k) };
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * 2.0 * z / (2.0 * PI).powi(2 * k as i32)
            })
            .collect()
    })
}

/// `zeta(m)` for even `m >= 4` by a short sum plus an Euler–Maclaurin tail.
fn zeta_even_real(m: usize) -> f64 {
    let n = 50.0f64;
    let s = m as f64;
    let mut acc = 0.0;
    for k in (1..50).rev() {
        acc += (k as f64).powf(-s);
    }
    acc + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
}

/// Euler–Maclaurin evaluation, valid for any `s != 1`; used directly for
/// `Re s >= 1/2`.
pub(crate) fn zeta_em(s: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let n_terms = 16usize.max((s.im.abs() / 2.0).ceil() as usize + 16).max((s.re.abs() * 0.5) as usize + 16);
    let nf = n_terms as f64;
    let ln_n = nf.ln();
    let mut head = CompensatedSum::new();
    for n in (1..n_terms).rev() {
        head.add((-s * (n as f64).ln()).exp());
    }
    let n_pow = (-s * ln_n).exp(); // N^{-s}
    let mut total = head.value() + n_pow * nf / (s - one) + n_pow * 0.5;

    let coeffs = em_coefficients();
    let mut poch = s; // (s)_{2k-1}
    let mut n_factor = n_pow / nf; // N^{-s-2k+1}
    let inv_n2 = 1.0 / (nf * nf);
    let mut prev = f64::INFINITY;
    for (k, &c) in coeffs.iter().enumerate() {
        let term = poch * n_factor * c;
        let mag = term.norm();
        total += term;
        if mag <= 1e-17 * total.norm() || mag > prev {
            break;
        }
        prev = mag;
        let kk = (k + 1) as f64;
        poch *= (s + (2.0 * kk - 1.0)) * (s + 2.0 * kk);
        n_factor *= inv_n2;
    }
    total
}

/// Riemann zeta function.
///
/// Euler–Maclaurin summation for `Re s >= 1/2` (and near `s = 0`), the
/// functional equation elsewhere. Designed for `|Im s| <= 200` and `-10 <= Re s <= 10`.
pub fn zeta(s: Complex64) -> Result<Complex64> {
    if (s - 1.0).norm() < 1e-15 {
        return Err(Error::domain("zeta has a pole at s = 1"));
    }
    if !s.re.is_finite() || !s.im.is_finite() {
        return Err(Error::domain(format!("zeta evaluated at non-finite point {s}")));
    }
    // Near s = 0 the reflected form needs zeta(1 - s) next to its pole.
    if s.re >= 0.5 || s.norm() < 0.25 {
        return Ok(zeta_em(s));
    }
    let one_minus = Complex64::new(1.0, 0.0) - s;
    Ok(chi(s) * zeta_em(one_minus))
}

/// Real-argument convenience wrapper.
pub fn zeta_real(x: f64) -> Result<f64> {
    zeta(Complex64::new(x, 0.0)).map(|z| z.re)
}

/// The factor in `zeta(s) = chi(s) zeta(1 - s)`:
/// `2^s pi^{s-1} sin(pi s / 2) Gamma(1 - s)`.
pub fn chi(s: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let log_part = s * 2f64.ln() + (s - one) * PI.ln() + ln_gamma(one - s);
    log_part.exp() * (s * (PI / 2.0)).sin()
}

const STIRLING: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// A logarithm of `Gamma(z)` (not necessarily the principal branch, so only
/// `exp(ln_gamma(z))` is meaningful).
pub fn ln_gamma(z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if z.re < 0.5 {
        // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        return Complex64::new(PI.ln(), 0.0) - (z * PI).sin().ln() - ln_gamma(one - z);
    }
    let mut w = z;
    let mut prod = one;
    while w.norm() < 15.0 {
        prod *= w;
        w += 1.0;
    }
    let ln_w = w.ln();
    let mut series = Complex64::new(0.0, 0.0);
    let inv = one / w;
    let inv2 = inv * inv;
    let mut pw = inv;
    for (k, &b) in STIRLING.iter().enumerate() {
        let kk = (k + 1) as f64;
        series += pw * (b / (2.0 * kk * (2.0 * kk - 1.0)));
        pw *= inv2;
    }
    (w - 0.5) * ln_w - w + 0.5 * (2.0 * PI).ln() + series - prod.ln()
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn classical_values() {
        assert!(rel(zeta(c(2.0, 0.0)).unwrap(), c(PI * PI / 6.0, 0.0)) < 1e-14);
        assert!(rel(zeta(c(4.0, 0.0)).unwrap(), c(PI.powi(4) / 90.0, 0.0)) < 1e-14);
        assert!(rel(zeta(c(0.0, 0.0)).unwrap(), c(-0.5, 0.0)) < 1e-13);
        assert!(rel(zeta(c(-1.0, 0.0)).unwrap(), c(-1.0 / 12.0, 0.0)) < 1e-13);
        assert!(rel(zeta(c(-3.0, 0.0)).unwrap(), c(1.0 / 120.0, 0.0)) < 1e-12);
        assert!(zeta(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn zeta_three_matches_direct_sum_with_tail() {
        // sum_{n<N} n^-3 plus the Euler–Maclaurin tail N^-2/2 + N^-3/2 + N^-4/4
        let n = 2000.0f64;
        let mut acc = 0.0;
        for k in (1..2000).rev() {
            acc += (k as f64).powi(-3);
        }
        let oracle = acc + n.powi(-2) / 2.0 + n.powi(-3) / 2.0 + n.powi(-4) / 4.0;
        assert!((zeta_real(3.0).unwrap() - oracle).abs() < 1e-12 * oracle);
    }

    #[test]
    fn first_zero_and_high_values() {
        let rho = c(0.5, 14.134_725_141_734_693);
        assert!(zeta(rho).unwrap().norm() < 1e-12);
        // zeta(1/2 + 100i), reference value from mpmath
        let v = zeta(c(0.5, 100.0)).unwrap();
        assert!(rel(v, c(2.692_619_885_681_324, -0.020_386_029_602_598_16)) < 1e-11);
    }

    #[test]
    fn euler_maclaurin_agrees_with_reflection() {
        for &(re, im) in &[(-0.5, 3.0), (0.2, -7.0), (-2.5, 1.0), (0.3, 40.0), (-1.0, 0.5)] {
            let s = c(re, im);
            let direct = zeta_em(s);
            let reflected = zeta(s).unwrap();
            assert!(rel(reflected, direct) < 1e-9, "s = {s}");
        }
    }

    #[test]
    fn functional_equation_moduli() {
        let mut x = 0.123f64;
        for _ in 0..20 {
            x = (x * 9301.0 + 49297.0) % 233280.0 / 233280.0;
            let re = -1.0 + 3.0 * x;
            let im = -30.0 + 60.0 * ((x * 7.0) % 1.0);
            let s = c(re, im);
            let lhs = zeta(s).unwrap().norm();
            let rhs = chi(s).norm() * zeta(c(1.0, 0.0) - s).unwrap().norm();
            assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1e-3), "s = {s}");
        }
    }

    #[test]
    fn gamma_values() {
        assert!(rel(gamma(c(5.0, 0.0)), c(24.0, 0.0)) < 1e-14);
        assert!(rel(gamma(c(0.5, 0.0)), c(PI.sqrt(), 0.0)) < 1e-14);
        assert!(rel(gamma(c(-0.5, 0.0)), c(-2.0 * PI.sqrt(), 0.0)) < 1e-14);
        // |Gamma(1/2 + i t)|^2 = pi / cosh(pi t)
        let g = gamma(c(0.5, 3.0)).norm_sqr();
        assert!((g - PI / (PI * 3.0).cosh()).abs() < 1e-13 * g, "{g}");
    }

    #[test]
    fn laurent_constant_at_one() {
        let h = 1e-5;
        let v = zeta(c(1.0 + h, 0.0)).unwrap().re - 1.0 / h;
        assert!((v - EULER_GAMMA).abs() < 1e-4);
    }
}
