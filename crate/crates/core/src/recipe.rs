//! The conjectural side of the mean square of Dirichlet polynomials with
//! shifted divisor coefficients.
//!
//! * [`recipe_r`]: the full recipe sum over equal-size swaps `(U, V)`;
//! * [`diagonal_term`]: `T psi_hat(0) sum_{n <= X} tau_A(n) tau_B(n) / n`;
//! * [`one_swap_term`]: the contribution of one swapped pair, evaluated by
//!   residues of
//!   `Y^s / s * A_hat(s) prod zeta(1 + s + a + b) zeta(1 - a_hat - b_hat - s)`
//!   with `Y = 2 pi X / (t T)`, then integrated against the weight;
//! * [`conjectured_i`]: the diagonal plus, once `X >= T`, every one-swap term.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::divisor::ShiftedTauTable;
use crate::error::{Error, Result};
use crate::euler::{global_a, z_product, AhatTable, SwapPair};
use crate::shifts::ShiftSet;
use crate::special::quad::GaussLegendre;
use crate::special::residue::{residue_at, ContourSpec};
use crate::special::weight::SmoothWeight;
use crate::special::zeta::zeta;
use crate::sum::{chunked_sum, par_map, CompensatedSum};

/// Nodes of the Gauss–Legendre rule for the `t`-integral over `[1, 2]`.
pub const T_NODES: usize = 64;
/// Minimum distance between the poles of the one-swap integrand.
pub const POLE_SEPARATION: f64 = 1e-4;
/// Largest residue contour radius.
pub const MAX_CONTOUR_RADIUS: f64 = 1e-3;
/// Abscissa of the line the contour is shifted to.
pub const REMAINDER_LINE: f64 = -0.25;
/// Upper limit on `X / T^2` for the one-swap regime.
pub const MAX_X_OVER_T_SQUARED: f64 = 0.99;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// `T int_1^2 psi(t) f(t) dt`.
fn weighted_t_integral<F: FnMut(f64) -> Complex64>(weight: &SmoothWeight, big_t: f64, mut f: F) -> Complex64 {
    let gl = GaussLegendre::new(T_NODES);
    let mut acc = CompensatedSum::new();
    for (t, w) in gl.on(1.0, 2.0) {
        acc.add(f(t) * (w * weight.psi(t)));
    }
    acc.value() * big_t
}

/// One `(U, V)` term of the recipe.
#[derive(Debug, Clone, Serialize)]
pub struct RecipeTerm {
    pub u: Vec<usize>,
    pub v: Vec<usize>,
    pub value: Complex64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecipeValue {
    pub value: Complex64,
    pub terms: Vec<RecipeTerm>,
    /// Sum of the Euler-product error estimates, scaled into the result.
    pub euler_error: f64,
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize == size {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    out
}

/// `(A - U) + (-V)` and `(B - V) + (-U)`.
pub fn swapped_sets(a: &ShiftSet, b: &ShiftSet, u: &[usize], v: &[usize]) -> (ShiftSet, ShiftSet) {
    let mut sa: Vec<Complex64> = (0..a.len()).filter(|i| !u.contains(i)).map(|i| a.as_slice()[i]).collect();
    let mut sb: Vec<Complex64> = (0..b.len()).filter(|i| !v.contains(i)).map(|i| b.as_slice()[i]).collect();
    sa.extend(v.iter().map(|&j| -b.as_slice()[j]));
    sb.extend(u.iter().map(|&i| -a.as_slice()[i]));
    (ShiftSet::from_derived(sa), ShiftSet::from_derived(sb))
}

/// The recipe `T int psi(t) sum_{U, V} (tT / 2 pi)^{-sum(U) - sum(V)} A Z(swapped) dt`
/// over `|U| = |V| <= max_swaps`.
pub fn recipe_r(
    a: &ShiftSet,
    b: &ShiftSet,
    big_t: f64,
    weight: &SmoothWeight,
    prime_bound: u64,
    max_swaps: usize,
) -> Result<RecipeValue> {
    if !(big_t > 0.0) {
        return Err(Error::invalid("T must be positive"));
    }
    let mut pairs = Vec::new();
    for j in 0..=max_swaps.min(a.len()).min(b.len()) {
        for u in subsets(a.len(), j) {
            for v in subsets(b.len(), j) {
                pairs.push((u.clone(), v));
            }
        }
    }
    let evaluated = par_map(&pairs, |(u, v)| -> Result<(Complex64, f64)> {
        let (sa, sb) = swapped_sets(a, b, u, v);
        let z = z_product(&sa, &sb).map_err(|e| {
            Error::domain(format!("recipe term U = {u:?}, V = {v:?}: {e}"))
        })?;
        let prod = global_a(&sa, &sb, prime_bound)?;
        let shift: Complex64 =
            u.iter().map(|&i| a.as_slice()[i]).sum::<Complex64>() + v.iter().map(|&j| b.as_slice()[j]).sum::<Complex64>();
        let factor = weighted_t_integral(weight, big_t, |t| (-shift * (t * big_t / (2.0 * PI)).ln()).exp());
        Ok((factor * prod.value * z, prod.error_estimate() * (factor * z).norm()))
    });
    let mut terms = Vec::with_capacity(pairs.len());
    let mut acc = CompensatedSum::new();
    let mut err = 0.0;
    for ((u, v), r) in pairs.into_iter().zip(evaluated) {
        let (value, e) = r?;
        acc.add(value);
        err += e;
        terms.push(RecipeTerm { u, v, value });
    }
    Ok(RecipeValue {
        value: acc.value(),
        terms,
        euler_error: err,
    })
}

/// `T psi_hat(0) sum_{n <= X} tau_A(n) tau_B(n) / n`.
pub fn diagonal_term(
    table_a: &ShiftedTauTable,
    table_b: &ShiftedTauTable,
    big_t: f64,
    x: f64,
    weight: &SmoothWeight,
) -> Result<Complex64> {
    if !(x >= 0.0) {
        return Err(Error::invalid("X must be nonnegative"));
    }
    let n_max = x.floor() as u64;
    let limit = table_a.limit().min(table_b.limit()) as u64;
    if n_max > limit {
        return Err(Error::Bounds { index: n_max, limit });
    }
    let ta = table_a.raw();
    let tb = table_b.raw();
    let sum = chunked_sum(1, n_max + 1, 1 << 16, |lo, hi| {
        let mut acc = CompensatedSum::new();
        for n in lo as usize..hi as usize {
            acc.add(ta[n] * tb[n] / n as f64);
        }
        acc.value()
    });
    Ok(sum * (big_t * weight.psi_hat_zero()))
}

/// A residue of the one-swap integrand (without the `Y^s` factor).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PoleResidue {
    pub pole: Complex64,
    pub residue: Complex64,
}

/// One `(a_hat, b_hat)` contribution with its bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct OneSwapTerm {
    pub index_a: usize,
    pub index_b: usize,
    pub alpha_hat: Complex64,
    pub beta_hat: Complex64,
    pub value: Complex64,
    pub residues: Vec<PoleResidue>,
    /// Size estimate of the integral left on `Re s = -1/4`.
    pub remainder_estimate: f64,
    /// Euler-product truncation error, propagated into `value`.
    pub euler_error: f64,
}

fn check_one_swap_range(big_t: f64, x: f64) -> Result<()> {
    if !(big_t > 1.0) {
        return Err(Error::invalid("T must exceed 1"));
    }
    if x < big_t || x > MAX_X_OVER_T_SQUARED * big_t * big_t {
        return Err(Error::invalid(format!(
            "one-swap terms need T <= X <= {MAX_X_OVER_T_SQUARED} T^2, got T = {big_t}, X = {x}"
        )));
    }
    Ok(())
}

/// Poles of the one-swap integrand right of the remainder line.
pub fn one_swap_poles(pair: &SwapPair) -> Result<Vec<Complex64>> {
    let mut poles = vec![Complex64::new(0.0, 0.0), -pair.alpha_hat - pair.beta_hat];
    for x in pair.a_rest.iter() {
        for y in pair.b_rest.iter() {
            poles.push(-x - y);
        }
    }
    for &p in &poles {
        if (p.re - REMAINDER_LINE).abs() < MAX_CONTOUR_RADIUS {
            return Err(Error::domain(format!("pole {p} sits on the remainder line Re s = {REMAINDER_LINE}")));
        }
    }
    poles.retain(|p| p.re > REMAINDER_LINE);
    for i in 0..poles.len() {
        for j in i + 1..poles.len() {
            let gap = (poles[i] - poles[j]).norm();
            if gap < POLE_SEPARATION {
                return Err(Error::domain(format!(
                    "poles {} and {} are {gap:.2e} apart (< {POLE_SEPARATION}); perturb the shifts",
                    poles[i], poles[j]
                )));
            }
        }
    }
    Ok(poles)
}

/// Evaluator for the one-swap integrand
/// `A_hat(s) prod_{A' x B'} zeta(1 + s + a + b) zeta(1 - a_hat - b_hat - s) / s`.
struct SwapIntegrand {
    table: AhatTable,
}

impl SwapIntegrand {
    fn eval(&self, s: Complex64) -> Result<(Complex64, f64)> {
        let pair = &self.table.pair;
        let prod = self.table.global(s)?;
        let mut z = zeta(ONE - pair.alpha_hat - pair.beta_hat - s)?;
        for x in pair.a_rest.iter() {
            for y in pair.b_rest.iter() {
                z *= zeta(ONE + s + x + y)?;
            }
        }
        let v = prod.value * z / s;
        Ok((v, prod.error_estimate() * (z / s).norm()))
    }
}

/// The `(a_hat, b_hat) = (A[ia], B[ib])` one-swap term.
#[allow(clippy::too_many_arguments)]
pub fn one_swap_term(
    a: &ShiftSet,
    b: &ShiftSet,
    ia: usize,
    ib: usize,
    big_t: f64,
    x: f64,
    weight: &SmoothWeight,
    prime_bound: u64,
) -> Result<OneSwapTerm> {
    check_one_swap_range(big_t, x)?;
    let pair = SwapPair::new(a, b, ia, ib)?;
    let poles = one_swap_poles(&pair)?;
    let mut min_gap = f64::INFINITY;
    for i in 0..poles.len() {
        for j in i + 1..poles.len() {
            min_gap = min_gap.min((poles[i] - poles[j]).norm());
        }
    }
    let radius = MAX_CONTOUR_RADIUS.min(0.5 * min_gap);
    let integrand = SwapIntegrand {
        table: AhatTable::build(a, b, ia, ib, prime_bound, REMAINDER_LINE - 0.05)?,
    };

    let mut euler_rel: f64 = 0.0;
    let mut residues = Vec::with_capacity(poles.len());
    for &pole in &poles {
        let spec = ContourSpec::new(pole, radius)?;
        let mut worst: f64 = 0.0;
        let r = residue_at(
            |s| {
                let (v, e) = integrand.eval(s)?;
                worst = worst.max(e / v.norm().max(1e-300));
                Ok(v)
            },
            &spec,
        )?;
        euler_rel = euler_rel.max(worst);
        residues.push(PoleResidue { pole, residue: r });
    }

    let mut prefactor = ONE;
    for x in pair.a_rest.iter() {
        prefactor *= zeta(ONE + x - pair.alpha_hat)?;
    }
    for y in pair.b_rest.iter() {
        prefactor *= zeta(ONE + y - pair.beta_hat)?;
    }
    let w = pair.alpha_hat + pair.beta_hat;
    let value = weighted_t_integral(weight, big_t, |t| {
        let ln_y = (2.0 * PI * x / (t * big_t)).ln();
        let lead = (-w * (t * big_t / (2.0 * PI)).ln()).exp();
        let mut acc = CompensatedSum::new();
        for r in &residues {
            acc.add(r.residue * (r.pole * ln_y).exp());
        }
        lead * acc.value()
    }) * prefactor;

    // |integrand| on Re s = -1/4 near the real axis times Y^{-1/4}
    let mut line_max: f64 = 0.0;
    for y in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
        for sign in [1.0, -1.0] {
            let (v, _) = integrand.eval(Complex64::new(REMAINDER_LINE, sign * y))?;
            line_max = line_max.max(v.norm());
        }
    }
    let y_min = 2.0 * PI * x / (2.0 * big_t);
    let lead_max = (big_t / (2.0 * PI)).powf(-w.re).max((2.0 * big_t / (2.0 * PI)).powf(-w.re));
    let remainder_estimate =
        big_t * weight.psi_hat_zero() * prefactor.norm() * lead_max * y_min.powf(REMAINDER_LINE) * line_max;

    Ok(OneSwapTerm {
        index_a: ia,
        index_b: ib,
        alpha_hat: pair.alpha_hat,
        beta_hat: pair.beta_hat,
        value,
        residues,
        remainder_estimate,
        euler_error: euler_rel * value.norm(),
    })
}

/// The conjectured mean square with its components.
#[derive(Debug, Clone, Serialize)]
pub struct ConjecturedI {
    pub value: Complex64,
    pub diagonal: Complex64,
    pub one_swap: Vec<OneSwapTerm>,
    pub remainder_total: f64,
    pub euler_error_total: f64,
}

impl ConjecturedI {
    /// Sum of the reported components.
    pub fn component_sum(&self) -> Complex64 {
        let mut acc = CompensatedSum::new();
        acc.add(self.diagonal);
        for t in &self.one_swap {
            acc.add(t.value);
        }
        acc.value()
    }
}

/// Diagonal plus, for `X >= T`, all one-swap terms.
#[allow(clippy::too_many_arguments)]
pub fn conjectured_i(
    a: &ShiftSet,
    b: &ShiftSet,
    big_t: f64,
    x: f64,
    weight: &SmoothWeight,
    prime_bound: u64,
    table_a: &ShiftedTauTable,
    table_b: &ShiftedTauTable,
) -> Result<ConjecturedI> {
    if x > MAX_X_OVER_T_SQUARED * big_t * big_t {
        return Err(Error::invalid(format!(
            "X = {x} is beyond the one-swap regime X <= {MAX_X_OVER_T_SQUARED} T^2"
        )));
    }
    let diagonal = diagonal_term(table_a, table_b, big_t, x, weight)?;
    let mut one_swap = Vec::new();
    if x >= big_t {
        for (name, set) in [("A", a), ("B", b)] {
            if !set.is_simple(POLE_SEPARATION) {
                return Err(Error::invalid(format!(
                    "swap terms need the shifts in {name} at least {POLE_SEPARATION} apart"
                )));
            }
        }
        let pairs: Vec<(usize, usize)> = (0..a.len()).flat_map(|i| (0..b.len()).map(move |j| (i, j))).collect();
        for r in par_map(&pairs, |&(i, j)| one_swap_term(a, b, i, j, big_t, x, weight, prime_bound)) {
            one_swap.push(r?);
        }
    }
    let mut acc = CompensatedSum::new();
    acc.add(diagonal);
    for t in &one_swap {
        acc.add(t.value);
    }
    Ok(ConjecturedI {
        value: acc.value(),
        diagonal,
        remainder_total: one_swap.iter().map(|t| t.remainder_estimate).sum(),
        euler_error_total: one_swap.iter().map(|t| t.euler_error).sum(),
        one_swap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::{a_times_z, global_a_hat};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    fn cset(v: &[(f64, f64)]) -> ShiftSet {
        ShiftSet::new(v.iter().map(|&(r, i)| c(r, i)).collect()).unwrap()
    }

    #[test]
    fn swap_census() {
        let a = cset(&[(0.01, 0.0), (0.02, 0.01), (-0.03, 0.0)]);
        let b = cset(&[(0.015, 0.0), (-0.01, -0.02), (0.04, 0.0)]);
        let w = SmoothWeight::standard();
        let r = recipe_r(&a, &b, 100.0, w, 50, 3).unwrap();
        assert_eq!(r.terms.len(), 20);
        for j in 0..=3 {
            let count = r.terms.iter().filter(|t| t.u.len() == j).count();
            let binom = [1, 3, 3, 1][j];
            assert_eq!(count, binom * binom);
        }
    }

    #[test]
    fn recipe_without_swaps() {
        let a = cset(&[(0.01, 0.0), (0.02, 0.01)]);
        let b = cset(&[(0.015, 0.0), (-0.01, -0.02)]);
        let w = SmoothWeight::standard();
        let r = recipe_r(&a, &b, 1000.0, w, 2000, 0).unwrap();
        let (az, _) = a_times_z(&a, &b, 2000).unwrap();
        assert!(rel(r.value, az * (1000.0 * w.psi_hat_zero())) < 1e-12);
    }

    #[test]
    fn recipe_single_shifts() {
        let (al, be) = (0.03, 0.02);
        let a = ShiftSet::real(&[al]).unwrap();
        let b = ShiftSet::real(&[be]).unwrap();
        let w = SmoothWeight::standard();
        let big_t = 500.0;
        let r = recipe_r(&a, &b, big_t, w, 100, 1).unwrap();
        let z1 = zeta(c(1.0 + al + be, 0.0)).unwrap();
        let z2 = zeta(c(1.0 - al - be, 0.0)).unwrap();
        let gl = GaussLegendre::new(96);
        let mut oracle = c(0.0, 0.0);
        for (t, wt) in gl.on(1.0, 2.0) {
            let y = (t * big_t / (2.0 * PI)).powf(-al - be);
            oracle += (z1 + z2 * y) * wt * crate::special::weight::psi(t);
        }
        oracle *= big_t;
        assert!(rel(r.value, oracle) < 1e-12);
    }

    #[test]
    fn recipe_rejects_poles() {
        let a = ShiftSet::real(&[0.03]).unwrap();
        let b = ShiftSet::real(&[-0.03]).unwrap();
        let err = recipe_r(&a, &b, 100.0, SmoothWeight::standard(), 50, 1).unwrap_err();
        assert!(err.to_string().contains("U = [0], V = [0]") || err.to_string().contains("U = []"));
    }

    #[test]
    fn diagonal_examples() {
        let zero = ShiftSet::real(&[0.0]).unwrap();
        let t = ShiftedTauTable::build(&zero, 100).unwrap();
        let w = SmoothWeight::standard();
        let h10: f64 = (1..=10).map(|n| 1.0 / n as f64).sum();
        assert!((diagonal_term(&t, &t, 1.0, 10.0, w).unwrap() - w.psi_hat_zero() * h10).norm() < 1e-16);
        let d1 = diagonal_term(&t, &t, 3.0, 10.7, w).unwrap();
        assert!((d1 - 3.0 * w.psi_hat_zero() * h10).norm() < 1e-15);
        assert!(diagonal_term(&t, &t, 1.0, 101.0, w).is_err());
        let a = cset(&[(0.02, 0.01), (-0.01, 0.0)]);
        let b = cset(&[(0.03, -0.02)]);
        let ta = ShiftedTauTable::build(&a, 500).unwrap();
        let tb = ShiftedTauTable::build(&b, 500).unwrap();
        let mut lit = c(0.0, 0.0);
        for n in 1..=500u64 {
            lit += crate::divisor::tau_at(&a, n).unwrap() * crate::divisor::tau_at(&b, n).unwrap() / n as f64;
        }
        let d = diagonal_term(&ta, &tb, 1.0, 500.0, w).unwrap();
        assert!(rel(d, lit * w.psi_hat_zero()) < 1e-12);
    }

    #[test]
    fn pole_bookkeeping() {
        let a = cset(&[(0.02, 0.0), (-0.01, 0.005)]);
        let b = cset(&[(0.015, 0.0), (-0.025, -0.01)]);
        let pair = SwapPair::new(&a, &b, 0, 1).unwrap();
        assert_eq!(one_swap_poles(&pair).unwrap().len(), 3);
        let a3 = cset(&[(0.02, 0.0), (-0.01, 0.005), (0.03, 0.02)]);
        let pair = SwapPair::new(&a3, &b, 0, 0).unwrap();
        assert_eq!(one_swap_poles(&pair).unwrap().len(), 2 + 2);
        let a = ShiftSet::real(&[0.01]).unwrap();
        let b = ShiftSet::real(&[-0.01]).unwrap();
        let pair = SwapPair::new(&a, &b, 0, 0).unwrap();
        assert!(matches!(one_swap_poles(&pair), Err(Error::Domain(_))));
    }

    #[test]
    fn one_swap_single_shift_closed_form() {
        // k = l = 1: residues 1/s * zeta(1 - w - s) give zeta(1 - w) at 0 and
        // Y^{-w} / w at -w.
        let (al, be) = (0.013, 0.007);
        let a = ShiftSet::real(&[al]).unwrap();
        let b = ShiftSet::real(&[be]).unwrap();
        let w = SmoothWeight::standard();
        let (big_t, x) = (300.0, 900.0);
        let term = one_swap_term(&a, &b, 0, 0, big_t, x, w, 100).unwrap();
        assert_eq!(term.residues.len(), 2);
        let ws = al + be;
        let z = zeta(c(1.0 - ws, 0.0)).unwrap().re;
        let gl = GaussLegendre::new(96);
        let mut oracle = 0.0;
        for (t, wt) in gl.on(1.0, 2.0) {
            let y = 2.0 * PI * x / (t * big_t);
            let lead = (t * big_t / (2.0 * PI)).powf(-ws);
            oracle += wt * crate::special::weight::psi(t) * lead * (z + y.powf(-ws) / ws);
        }
        oracle *= big_t;
        assert!((term.value.re - oracle).abs() < 1e-9 * oracle.abs(), "{} vs {oracle}", term.value);
        assert!(term.value.im.abs() < 1e-9 * oracle.abs());
    }

    #[test]
    fn one_swap_matches_line_integral() {
        // (1 / 2 pi i) int_{Re s = 1/8} (2 pi X / T)^s / s zeta(1 - w - s) M(s) ds,
        // M(s) = T int psi(t) (tT / 2 pi)^{-w} t^{-s} dt.
        let a = ShiftSet::real(&[0.02]).unwrap();
        let b = ShiftSet::real(&[0.01]).unwrap();
        let weight = SmoothWeight::standard();
        let (big_t, x) = (100.0, 200.0);
        let term = one_swap_term(&a, &b, 0, 0, big_t, x, weight, 100).unwrap();
        let ws = 0.03;
        let tgl = GaussLegendre::new(64).on(1.0, 2.0);
        let mellin = |s: Complex64| {
            let mut acc = c(0.0, 0.0);
            for &(t, wt) in &tgl {
                let lead = (t * big_t / (2.0 * PI)).powf(-ws);
                acc += (-s * t.ln()).exp() * (wt * crate::special::weight::psi(t) * lead);
            }
            acc * big_t
        };
        let ln_y = (2.0 * PI * x / big_t).ln();
        let gl = GaussLegendre::new(16);
        let mut acc = CompensatedSum::new();
        for k in -2000..2000 {
            for (y, wt) in gl.on(k as f64, k as f64 + 1.0) {
                let s = c(0.125, y);
                let f = (s * ln_y).exp() / s * zeta(c(1.0 - ws, 0.0) - s).unwrap() * mellin(s);
                acc.add(f * wt);
            }
        }
        let line = acc.value() / (2.0 * PI);
        assert!(rel(term.value, line) < 1e-3, "{} vs {line}", term.value);
    }

    #[test]
    fn one_swap_grows_with_x() {
        let a = ShiftSet::real(&[0.012]).unwrap();
        let b = ShiftSet::real(&[0.004]).unwrap();
        let w = SmoothWeight::standard();
        let big_t = 400.0;
        let mags: Vec<f64> = [1.2, 2.0, 4.0]
            .iter()
            .map(|&f| one_swap_term(&a, &b, 0, 0, big_t, f * big_t, w, 100).unwrap().value.norm())
            .collect();
        assert!(mags[0] < mags[1] && mags[1] < mags[2], "{mags:?}");
    }

    #[test]
    fn one_swap_integrand_matches_recipe_integrand() {
        // The recipe's (U, V) = ({a_hat}, {b_hat}) Perron integrand, built from
        // A and Z of the swapped and translated sets, equals the one-swap
        // integrand built from A_hat.
        let a = cset(&[(0.02, 0.0), (-0.01, 0.0)]);
        let b = cset(&[(0.015, 0.0), (-0.025, 0.0)]);
        let bound = 5000;
        for (ia, ib) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let pair = SwapPair::new(&a, &b, ia, ib).unwrap();
            for s in [c(0.05, 0.0), c(0.1, 0.3), c(-0.02, -0.1)] {
                let (sa, sb) = pair.swapped_sets(s);
                let recipe_side = global_a(&sa, &sb, bound).unwrap().value
                    * z_product(&pair.a_rest.translate(s), &pair.b_rest).unwrap()
                    * z_product(&pair.a_rest, &ShiftSet::from_derived(vec![-pair.alpha_hat])).unwrap()
                    * z_product(&ShiftSet::from_derived(vec![-pair.beta_hat]), &pair.b_rest).unwrap()
                    * zeta(ONE - pair.alpha_hat - pair.beta_hat - s).unwrap();
                let mut swap_side = global_a_hat(&a, &b, ia, ib, s, bound).unwrap().value
                    * zeta(ONE - pair.alpha_hat - pair.beta_hat - s).unwrap();
                for x in pair.a_rest.iter() {
                    swap_side *= zeta(ONE + x - pair.alpha_hat).unwrap();
                    for y in pair.b_rest.iter() {
                        swap_side *= zeta(ONE + s + x + y).unwrap();
                    }
                }
                for y in pair.b_rest.iter() {
                    swap_side *= zeta(ONE + y - pair.beta_hat).unwrap();
                }
                assert!(rel(swap_side, recipe_side) < 1e-6, "({ia}, {ib}) at s = {s}");
            }
        }
    }

    #[test]
    fn conjugation_symmetry() {
        let a = cset(&[(0.02, 0.01), (-0.01, 0.005)]);
        let b = cset(&[(0.015, -0.01), (-0.025, 0.0)]);
        let w = SmoothWeight::standard();
        let (big_t, x) = (200.0, 500.0);
        let ta = ShiftedTauTable::build(&a, 600).unwrap();
        let tb = ShiftedTauTable::build(&b, 600).unwrap();
        let tac = ShiftedTauTable::build(&a.conj(), 600).unwrap();
        let tbc = ShiftedTauTable::build(&b.conj(), 600).unwrap();
        let i = conjectured_i(&a, &b, big_t, x, w, 500, &ta, &tb).unwrap();
        let ic = conjectured_i(&a.conj(), &b.conj(), big_t, x, w, 500, &tac, &tbc).unwrap();
        assert!(rel(ic.value, i.value.conj()) < 1e-10);
        assert!(rel(ic.diagonal, i.diagonal.conj()) < 1e-10);
        let r = recipe_r(&a, &b, big_t, w, 500, 1).unwrap();
        let rc = recipe_r(&a.conj(), &b.conj(), big_t, w, 500, 1).unwrap();
        assert!(rel(rc.value, r.value.conj()) < 1e-10);
        assert_eq!(i.one_swap.len(), 4);
        assert!(rel(i.component_sum(), i.value) < 1e-15);
    }

    #[test]
    fn short_polynomials_keep_only_the_diagonal() {
        let a = cset(&[(0.02, 0.0), (-0.01, 0.0)]);
        let b = cset(&[(0.015, 0.0), (-0.025, 0.0)]);
        let w = SmoothWeight::standard();
        let ta = ShiftedTauTable::build(&a, 600).unwrap();
        let tb = ShiftedTauTable::build(&b, 600).unwrap();
        let i = conjectured_i(&a, &b, 1000.0, 500.0, w, 500, &ta, &tb).unwrap();
        assert!(i.one_swap.is_empty());
        assert_eq!(i.value, i.diagonal);
        assert_eq!(i.value, diagonal_term(&ta, &tb, 1000.0, 500.0, w).unwrap());
        assert!(one_swap_term(&a, &b, 0, 0, 1000.0, 500.0, w, 100).is_err());
        assert!(conjectured_i(&a, &b, 10.0, 100.0, w, 100, &ta, &tb).is_err());
    }
}
