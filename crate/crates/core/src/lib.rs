//! Numerical companion for shifted moments of the Riemann zeta function
//! computed through long Dirichlet polynomials and shifted divisor sums.
//!
//! The crate evaluates both sides of the comparison:
//!
//! * the empirical side: tables of the shifted divisor function
//!   ([`divisor`]), smoothed mean squares of Dirichlet polynomials
//!   ([`moments`]) and shifted convolution sums ([`correlation`]);
//! * the conjectural side: the moment recipe and its swap terms
//!   ([`recipe`]), the arithmetic Euler products ([`euler`]) and the main
//!   term for divisor correlations ([`correlation`]).
//!
//! [`identities`] checks the Euler-product identities that tie the two
//! sides together, prime by prime.

// `!(x > 0.0)` style guards are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod correlation;
pub mod divisor;
pub mod error;
pub mod euler;
pub mod identities;
pub mod moments;
pub mod recipe;
pub mod shifts;
pub mod special;
pub mod sum;

pub use divisor::{tau_at, tau_prime_powers, ShiftedTauTable};
pub use error::{Error, Result};
pub use shifts::{ShiftPolicy, ShiftSet};

pub use num_complex::Complex64;

/// Version string embedded in every report.
pub const VERSION: &str = concat!("zmw ", env!("CARGO_PKG_VERSION"));
