//! Residues by the trapezoid rule on small circles.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// A circle `|s - center| = radius` sampled at `nodes` equispaced points.
///
/// The radius must stay below half the distance from `center` to any other
/// singularity of the integrand; the trapezoid rule then converges
/// geometrically in `nodes`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub center: Complex64,
    pub radius: f64,
    pub nodes: usize,
}

impl ContourSpec {
    pub const DEFAULT_NODES: usize = 64;

    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        Self::with_nodes(center, radius, Self::DEFAULT_NODES)
    }

    pub fn with_nodes(center: Complex64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(format!("contour radius must be positive, got {radius}")));
        }
        if !nodes.is_power_of_two() || nodes < 4 {
            return Err(Error::invalid(format!("contour node count must be a power of two >= 4, got {nodes}")));
        }
        Ok(ContourSpec { center, radius, nodes })
    }

    /// Checks the radius against the caller's list of other singularities.
    pub fn check_isolated(&self, others: &[Complex64]) -> Result<()> {
        for &z in others {
            let d = (z - self.center).norm();
            if d > 0.0 && self.radius >= 0.5 * d {
                return Err(Error::domain(format!(
                    "contour radius {} around {} is not below half the distance to the singularity at {z}",
                    self.radius, self.center
                )));
            }
        }
        Ok(())
    }
}

/// `(1 / 2 pi i)` times the contour integral of `f` around `spec`.
///
/// For a pole of any order at the center this is the full Laurent residue.
pub fn residue_at<F>(mut f: F, spec: &ContourSpec) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let n = spec.nodes;
    let mut acc = CompensatedSum::new();
    for j in 0..n {
        let theta = 2.0 * PI * (j as f64 + 0.5) / n as f64;
        let dir = Complex64::from_polar(spec.radius, theta);
        let s = spec.center + dir;
        let v = f(s)?;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Evaluation { node: s });
        }
        acc.add(v * dir);
    }
    Ok(acc.value() / n as f64)
}
