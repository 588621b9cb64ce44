//! Simulation library for cascaded three-photon parametric down-conversion
//! (ω₀ → ω₁ + ω₂, ω₂ → ω₁ + ω₁) in nonlinear crystal superlattices.
//!
//! The crate is organised along the physical pipeline:
//!
//! * [`qpm`]: phase mismatch and the quasi-phase-matching coupling
//!   constants ζ, ξ of layered, dual-grid and linear-spacer lattices.
//! * [`jsa`]: three-photon joint spectral amplitudes, walkoffs,
//!   heralding residuals and Schmidt analysis.
//! * [`cascade`]: discrete-mode cascaded Hamiltonians, second-order
//!   perturbative triplet states and the GHZ construction.
//! * [`opo`]: the dissipative cascaded OPO, with semiclassical results,
//!   dense Lindblad propagation, stochastic trajectories and observables.
//!
//! Units are SI internally (m, s, rad/s); ħ = 1 throughout.

pub mod cascade;
pub mod error;
pub mod fock;
pub mod ode;
pub mod jsa;
pub mod opo;
pub mod qpm;
pub mod quad;
pub mod special;

#[cfg(test)]
mod proptests;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Version tag written into every emitted document.
pub const SCHEMA_VERSION: u32 = 1;
