//! The bump weight `psi(t) = exp(-1 / ((t - 1)(2 - t)))` on `(1, 2)` and its
//! Fourier transform `psi_hat(xi) = int psi(t) e^{-2 pi i t xi} dt`.
//!
//! With this sign convention
//! `int_0^inf psi(t / T) (n / m)^{it} dt = T psi_hat((T / 2 pi) log(m / n))`.
//!
//! Since `psi` is symmetric about `t = 3/2`,
//! `psi_hat(xi) = e^{-3 pi i xi} C(xi)` with the real even envelope
//! `C(xi) = 2 int_0^{1/2} psi(3/2 + u) cos(2 pi u xi) du`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::special::quad::{adaptive, GaussLegendre};
use crate::sum::rsum;

/// Default decay threshold defining the cutoff `Xi`.
pub const DEFAULT_THRESHOLD: f64 = 1e-12;
/// Grid spacing of the cached transform.
pub const GRID_STEP: f64 = 1.0 / 2048.0;

const SCAN_STEP: f64 = 1.0 / 16.0;
const SCAN_LIMIT: f64 = 200.0;
const PANELS: usize = 96;
const PANEL_NODES: usize = 12;

/// `psi(t)`.
pub fn psi(t: f64) -> f64 {
    if t <= 1.0 || t >= 2.0 {
        0.0
    } else {
        (-1.0 / ((t - 1.0) * (2.0 - t))).exp()
    }
}

/// `psi_hat(xi)` by adaptive Gauss–Kronrod quadrature (absolute tolerance
/// `1e-15`). Slow; the cached grid in [`SmoothWeight`] is what callers use.
pub fn psi_hat_adaptive(xi: f64) -> Complex64 {
    let (v, _) = adaptive(
        |t| Complex64::from_polar(psi(t), -2.0 * PI * t * xi),
        1.0,
        2.0,
        1e-15,
    );
    v
}

/// Fixed composite Gauss–Legendre rule for the envelope `C(xi)`, with the
/// weights already multiplied by `2 psi(3/2 + u)`.
struct EnvelopeRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl EnvelopeRule {
    fn new() -> Self {
        let gl = GaussLegendre::new(PANEL_NODES);
        let width = 0.5 / PANELS as f64;
        let mut nodes = Vec::with_capacity(PANELS * PANEL_NODES);
        let mut weights = Vec::with_capacity(PANELS * PANEL_NODES);
        for k in 0..PANELS {
            let a = k as f64 * width;
            for (u, w) in gl.on(a, a + width) {
                let val = 2.0 * psi(1.5 + u) * w;
                if val > 0.0 {
                    nodes.push(2.0 * PI * u);
                    weights.push(val);
                }
            }
        }
        EnvelopeRule { nodes, weights }
    }

    fn envelope(&self, xi: f64) -> f64 {
        rsum(self.nodes.iter().zip(&self.weights).map(|(&u, &w)| w * (u * xi).cos()))
    }
}

/// `psi` together with a cached, interpolable grid of `psi_hat`.
#[derive(Debug, Clone)]
pub struct SmoothWeight {
    threshold: f64,
    cutoff: f64,
    step: f64,
    inv_step: f64,
    /// `grid[k] = psi_hat((k - 1) * step)`; `grid[0]` is the mirror value at `-step`.
    grid: Vec<Complex64>,
    psi_hat_zero: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightDescriptor {
    pub shape: &'static str,
    pub threshold: f64,
    pub cutoff: f64,
    pub grid_step: f64,
    pub psi_hat_zero: f64,
}

impl SmoothWeight {
    pub fn build() -> Self {
        Self::with_threshold(DEFAULT_THRESHOLD)
    }

    /// Shared instance with the default threshold.
    pub fn standard() -> &'static SmoothWeight {
        static W: OnceLock<SmoothWeight> = OnceLock::new();
        W.get_or_init(SmoothWeight::build)
    }

    /// Builds the grid, placing the cutoff `Xi` past the last scanned point
    /// where `|psi_hat| >= threshold`.
    pub fn with_threshold(threshold: f64) -> Self {
        let rule = EnvelopeRule::new();
        let scan_points = (SCAN_LIMIT / SCAN_STEP) as usize;
        let scan: Vec<f64> = (0..=scan_points)
            .into_par_iter()
            .map(|k| rule.envelope(k as f64 * SCAN_STEP))
            .collect();
        let last = scan.iter().rposition(|c| c.abs() >= threshold).unwrap_or(0);
        let cutoff = (last + 1) as f64 * SCAN_STEP;

        let step = GRID_STEP;
        let count = (cutoff / step).ceil() as usize + 4;
        let mut grid: Vec<Complex64> = (0..=count)
            .into_par_iter()
            .map(|k| {
                let xi = (k as f64 - 1.0) * step;
                Complex64::from_polar(rule.envelope(xi), -3.0 * PI * xi)
            })
            .collect();
        grid[0] = grid[2].conj();
        SmoothWeight {
            threshold,
            cutoff,
            step,
            inv_step: 1.0 / step,
            psi_hat_zero: grid[1].re,
            grid,
        }
    }

    pub fn psi(&self, t: f64) -> f64 {
        psi(t)
    }

    /// `Xi`: `|psi_hat(xi)| < threshold` for `|xi| >= Xi`.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// `psi_hat(0) = int psi`.
    pub fn psi_hat_zero(&self) -> f64 {
        self.psi_hat_zero
    }

    /// Cubic (four-point Lagrange) interpolation of the cached grid; zero
    /// beyond the cutoff.
    #[inline]
    pub fn psi_hat(&self, xi: f64) -> Complex64 {
        if xi < 0.0 {
            self.psi_hat_nonneg(-xi).conj()
        } else {
            self.psi_hat_nonneg(xi)
        }
    }

    #[inline(always)]
    pub(crate) fn psi_hat_nonneg(&self, xi: f64) -> Complex64 {
        if xi >= self.cutoff {
            return Complex64::new(0.0, 0.0);
        }
        let x = xi * self.inv_step;
        let i = x as usize;
        let f = x - i as f64;
        let fm1 = f - 1.0;
        let fm2 = f - 2.0;
        let fp1 = f + 1.0;
        let w0 = -f * fm1 * fm2 * (1.0 / 6.0);
        let w1 = fp1 * fm1 * fm2 * 0.5;
        let w2 = -fp1 * f * fm2 * 0.5;
        let w3 = fp1 * f * fm1 * (1.0 / 6.0);
        // grid index of xi_i is i + 1
        let g = &self.grid[i..i + 4];
        g[0] * w0 + g[1] * w1 + g[2] * w2 + g[3] * w3
    }

    /// Value at an exact grid node, `xi = k * step`.
    pub fn grid_value(&self, k: usize) -> Complex64 {
        self.grid[k + 1]
    }

    pub fn grid_len(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn descriptor(&self) -> WeightDescriptor {
        WeightDescriptor {
            shape: "exp(-1/((t-1)(2-t))) on (1,2)",
            threshold: self.threshold,
            cutoff: self.cutoff,
            grid_step: self.step,
            psi_hat_zero: self.psi_hat_zero,
        }
    }
}
