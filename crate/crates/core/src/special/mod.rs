//! Zeta, arithmetic sieves, the smooth weight and contour residues.

pub mod quad;
pub mod residue;
pub mod sieve;
pub mod weight;
pub mod zeta;

pub use residue::{residue_at, ContourSpec};
pub use sieve::ArithmeticSieve;
pub use weight::SmoothWeight;
pub use zeta::{zeta, zeta_real, EULER_GAMMA};
