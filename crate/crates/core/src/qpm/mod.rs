//! Phase mismatch and quasi-phase-matching coupling constants.
//!
//! Coupling constants follow the layered-medium sum
//! `Σ_m l_m χ_m exp(−i(φ_m + Δk_m l_m/2)) sinc(Δk_m l_m/2)` with
//! `φ_m = Σ_{n<m} l_n Δk_n`. Closed forms for periodic lattices are
//! evaluated with Dirichlet kernels and agree with the explicit sum.

mod coupling;
mod design;
mod dispersion;

pub use coupling::*;
pub use design::*;
pub use dispersion::*;
