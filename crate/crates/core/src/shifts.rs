//! Ordered sets of small complex shifts.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Validation limits applied when a shift set is built from user input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftPolicy {
    /// Upper bound on `|shift|`.
    pub max_radius: f64,
    /// Minimum pairwise distance between entries.
    pub min_separation: f64,
    /// Maximum number of entries.
    pub max_len: usize,
}

impl Default for ShiftPolicy {
    fn default() -> Self {
        ShiftPolicy {
            max_radius: 0.25,
            min_separation: 1e-6,
            max_len: 8,
        }
    }
}

/// A finite, ordered collection of complex shifts.
///
/// Sets built through [`ShiftSet::new`] or [`ShiftSet::with_policy`] have
/// pairwise separated entries, which keeps every pole in the residue formulas
/// simple. [`ShiftSet::multiset`] admits repeated entries for the places
/// where only divisor-function values are needed (e.g. `{0, 0}` gives the
/// ordinary divisor function). Derived sets (translates, unions, removals)
/// are not re-validated.
#[derive(Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShiftSet {
    shifts: Vec<Complex64>,
}

fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

impl ShiftSet {
    pub fn new(shifts: Vec<Complex64>) -> Result<Self> {
        Self::with_policy(shifts, &ShiftPolicy::default())
    }

    pub fn with_policy(shifts: Vec<Complex64>, policy: &ShiftPolicy) -> Result<Self> {
        let set = Self::multiset(shifts)?;
        if set.len() > policy.max_len {
            return Err(Error::InvalidShiftSet(format!(
                "{} shifts exceed the cap of {}",
                set.len(),
                policy.max_len
            )));
        }
        if let Some(z) = set.shifts.iter().find(|z| z.norm() > policy.max_radius) {
            return Err(Error::InvalidShiftSet(format!(
                "shift {z} lies outside the radius {}",
                policy.max_radius
            )));
        }
        if let Some((i, j)) = set.closest_pair_below(policy.min_separation) {
            return Err(Error::InvalidShiftSet(format!(
                "shifts {} and {} are closer than {}",
                set.shifts[i], set.shifts[j], policy.min_separation
            )));
        }
        Ok(set)
    }

    /// Builds a set that may contain repeated entries.
    pub fn multiset(shifts: Vec<Complex64>) -> Result<Self> {
        if shifts.is_empty() {
            return Err(Error::InvalidShiftSet("a shift set needs at least one entry".into()));
        }
        if shifts.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidShiftSet("shifts must be finite".into()));
        }
        Ok(ShiftSet { shifts })
    }

    pub fn real(shifts: &[f64]) -> Result<Self> {
        Self::new(shifts.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn empty() -> Self {
        ShiftSet { shifts: Vec::new() }
    }

    /// A set derived from validated ones (unions, swaps, translates); only
    /// the entries' finiteness is assumed.
    pub fn from_derived(shifts: Vec<Complex64>) -> Self {
        ShiftSet { shifts }
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.shifts
    }

    pub fn iter(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.shifts.iter().copied()
    }

    /// The set with entry `index` removed (`A' = A - {a}`).
    pub fn without(&self, index: usize) -> ShiftSet {
        let mut shifts = self.shifts.clone();
        shifts.remove(index);
        ShiftSet { shifts }
    }

    /// The set with `z` appended.
    pub fn with(&self, z: Complex64) -> ShiftSet {
        let mut shifts = self.shifts.clone();
        shifts.push(z);
        ShiftSet { shifts }
    }

    /// The translate `A_w = {w + a}`.
    pub fn translate(&self, w: Complex64) -> ShiftSet {
        ShiftSet {
            shifts: self.shifts.iter().map(|&a| a + w).collect(),
        }
    }

    pub fn negated(&self) -> ShiftSet {
        ShiftSet {
            shifts: self.shifts.iter().map(|&a| -a).collect(),
        }
    }

    pub fn conj(&self) -> ShiftSet {
        ShiftSet {
            shifts: self.shifts.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn union(&self, other: &ShiftSet) -> ShiftSet {
        let mut shifts = self.shifts.clone();
        shifts.extend_from_slice(&other.shifts);
        ShiftSet { shifts }
    }

    /// Smallest pairwise distance, or `None` for sets with fewer than two entries.
    pub fn min_separation(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.shifts.len() {
            for j in i + 1..self.shifts.len() {
                let d = (self.shifts[i] - self.shifts[j]).norm();
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }

    fn closest_pair_below(&self, eps: f64) -> Option<(usize, usize)> {
        for i in 0..self.shifts.len() {
            for j in i + 1..self.shifts.len() {
                if (self.shifts[i] - self.shifts[j]).norm() < eps {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Whether all entries are pairwise at least `eps` apart.
    pub fn is_simple(&self, eps: f64) -> bool {
        self.closest_pair_below(eps).is_none()
    }

    pub fn max_abs_re(&self) -> f64 {
        self.shifts.iter().fold(0.0, |m, z| m.max(z.re.abs()))
    }

    pub fn min_re(&self) -> f64 {
        self.shifts.iter().fold(f64::INFINITY, |m, z| m.min(z.re))
    }

    pub fn is_real(&self) -> bool {
        self.shifts.iter().all(|z| z.im == 0.0)
    }

    fn sorted(&self) -> Vec<Complex64> {
        let mut v = self.shifts.clone();
        v.sort_by(cmp_complex);
        v
    }
}

impl PartialEq for ShiftSet {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self
                .sorted()
                .iter()
                .zip(other.sorted().iter())
                .all(|(a, b)| cmp_complex(a, b) == Ordering::Equal)
    }
}

impl fmt::Debug for ShiftSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.shifts.iter()).finish()
    }
}

/// Parses a shift written as `a`, `a+bi`, `a-bi` or `bi`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Config(format!("cannot parse shift {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) {
        // Split at the last sign that is not part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            other => other,
        };
        let re: f64 = re.parse().map_err(|_| bad())?;
        let im: f64 = im.parse().map_err(|_| bad())?;
        Ok(Complex64::new(re, im))
    } else {
        let re: f64 = s.parse().map_err(|_| bad())?;
        Ok(Complex64::new(re, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_repeats_and_large_shifts() {
        assert!(ShiftSet::new(vec![c(0.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(ShiftSet::new(vec![c(0.3, 0.0)]).is_err());
        assert!(ShiftSet::new(vec![]).is_err());
        assert!(ShiftSet::new(vec![c(0.01, 0.0); 9]).is_err());
        assert!(ShiftSet::new(vec![c(0.1, 0.0), c(0.1 + 5e-7, 0.0)]).is_err());
        assert!(ShiftSet::multiset(vec![c(0.0, 0.0), c(0.0, 0.0)]).is_ok());
    }

    #[test]
    fn equality_ignores_order() {
        let a = ShiftSet::new(vec![c(0.1, 0.0), c(-0.05, 0.02)]).unwrap();
        let b = ShiftSet::new(vec![c(-0.05, 0.02), c(0.1, 0.0)]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, a.conj());
    }

    #[test]
    fn derived_sets() {
        let a = ShiftSet::real(&[0.125, 0.25]).unwrap();
        assert_eq!(a.without(0), ShiftSet::real(&[0.25]).unwrap());
        assert!(a.without(0).without(0).is_empty());
        assert_eq!(a.translate(c(-0.125, 0.0)), ShiftSet::real(&[0.0, 0.125]).unwrap());
        assert_eq!(a.negated().with(c(0.0, 0.0)).len(), 3);
    }

    #[test]
    fn parses_shift_notation() {
        assert_eq!(parse_complex("0.02").unwrap(), c(0.02, 0.0));
        assert_eq!(parse_complex("-0.02").unwrap(), c(-0.02, 0.0));
        assert_eq!(parse_complex("0.1+0.2i").unwrap(), c(0.1, 0.2));
        assert_eq!(parse_complex("0.1-0.2i").unwrap(), c(0.1, -0.2));
        assert_eq!(parse_complex("-0.3i").unwrap(), c(0.0, -0.3));
        assert_eq!(parse_complex("1e-3-2e-3i").unwrap(), c(1e-3, -2e-3));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert!(parse_complex("abc").is_err());
    }
}
