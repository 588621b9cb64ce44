//! Three-photon joint spectral amplitudes.
//!
//! Frequencies passed to [`amplitude_full`] and [`amplitude_resonant`] are
//! detunings `νₖ = ωₖ − ω₀/3` of the three ω₁-band photons. Couplings are
//! evaluated at absolute frequencies.

mod grid;
mod walkoff;

pub use grid::*;
pub use walkoff::*;

use crate::qpm::{
    xi_dualgrid, xi_linear_spacers, zeta_dualgrid, DispersionModel, DispersionTable, DualGrid, MismatchSpec,
    PhaseConvention, SpacerGrid,
};
use crate::quad::{integrate, QuadOptions};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gaussian pump envelope `E_L(ω) = E₀ exp(−τ_p²(ω−ω₀)²/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpPulse {
    pub e0: Complex64,
    pub tau_p: f64,
    pub omega0: f64,
    #[serde(default)]
    pub phase: f64,
}

impl PumpPulse {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_p > 0.0 && self.tau_p.is_finite()) {
            return Err(Error::config("pulse.tau_p", "must be positive and finite"));
        }
        if !self.omega0.is_finite() {
            return Err(Error::config("pulse.omega0", "must be finite"));
        }
        Ok(())
    }

    /// Centre of the ω₁ band, `ω₀/3`.
    pub fn subharmonic(&self) -> f64 {
        self.omega0 / 3.0
    }
}

pub fn pump_spectrum(pulse: &PumpPulse, omega: f64) -> Complex64 {
    let d = omega - pulse.omega0;
    pulse.e0 * (-0.5 * pulse.tau_p * pulse.tau_p * d * d).exp()
}

/// Phase-matching functions of the two cascaded processes.
pub trait Couplings: Sync {
    /// `ζ(ω, ω₁, ω₂)` for `ω → ω₁ + ω₂`.
    fn zeta(&self, omega: f64, omega1: f64, omega2: f64) -> Complex64;
    /// `ξ(ω₁′, ω₁″, ω₂)` for `ω₂ → ω₁′ + ω₁″`.
    fn xi(&self, omega1a: f64, omega1b: f64, omega2: f64) -> Complex64;
}

/// Test profile: constant ζ and a Lorentzian ξ in ω₂,
/// `ξ = ξ₀ / ((ω₂ − c)² + w²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianCouplings {
    pub zeta0: Complex64,
    pub xi0: Complex64,
    pub center: f64,
    pub width: f64,
}

impl Couplings for LorentzianCouplings {
    fn zeta(&self, _: f64, _: f64, _: f64) -> Complex64 {
        self.zeta0
    }

    fn xi(&self, _: f64, _: f64, omega2: f64) -> Complex64 {
        let d = omega2 - self.center;
        self.xi0 / (d * d + self.width * self.width)
    }
}

impl LorentzianCouplings {
    /// `∫ ζξ/(s − ω₂ + iε) dω₂` in closed form over the whole line.
    pub fn pole_integral(&self, s: f64, epsilon: f64) -> Complex64 {
        self.zeta0 * self.xi0 * (PI / self.width) / Complex64::new(s - self.center, self.width + epsilon)
    }
}

/// Couplings of a poled superlattice: dual-grid ζ and either dual-grid or
/// linear-spacer ξ, with mismatches taken from a dispersion table.
#[derive(Debug, Clone)]
pub struct LatticeCouplings {
    primary: [DispersionModel; 3],
    secondary: [DispersionModel; 3],
    spacer: Option<([DispersionModel; 3], SpacerGrid)>,
    pub grid: DualGrid,
    pub convention: PhaseConvention,
}

fn models(spec: &MismatchSpec, table: &DispersionTable) -> Result<[DispersionModel; 3]> {
    Ok([
        table.lookup(&spec.material, &spec.parent)?.clone(),
        table.lookup(&spec.material, &spec.first)?.clone(),
        table.lookup(&spec.material, &spec.second)?.clone(),
    ])
}

fn dk(m: &[DispersionModel; 3], w: (f64, f64, f64)) -> f64 {
    m[0].k(w.0) - m[1].k(w.1) - m[2].k(w.2)
}

impl LatticeCouplings {
    /// `spacer` carries the spacer-material mismatch of `ω₂ → ω₁′ + ω₁″` and
    /// the second-section geometry; when given it replaces the dual-grid ξ.
    pub fn new(
        table: &DispersionTable,
        primary: &MismatchSpec,
        secondary: &MismatchSpec,
        grid: DualGrid,
        spacer: Option<(&MismatchSpec, SpacerGrid)>,
        convention: PhaseConvention,
    ) -> Result<Self> {
        grid.validate("grid")?;
        let spacer = match spacer {
            Some((spec, g)) => {
                g.validate("spacer_grid")?;
                Some((models(spec, table)?, g))
            }
            None => None,
        };
        Ok(LatticeCouplings {
            primary: models(primary, table)?,
            secondary: models(secondary, table)?,
            spacer,
            grid,
            convention,
        })
    }
}

impl Couplings for LatticeCouplings {
    fn zeta(&self, omega: f64, omega1: f64, omega2: f64) -> Complex64 {
        zeta_dualgrid(&self.grid, dk(&self.primary, (omega, omega1, omega2)), self.convention).total()
    }

    fn xi(&self, omega1a: f64, omega1b: f64, omega2: f64) -> Complex64 {
        let w = (omega2, omega1a, omega1b);
        let dk2 = dk(&self.secondary, w);
        match &self.spacer {
            Some((m, g)) => xi_linear_spacers(g, dk2, dk(m, w), self.convention),
            None => xi_dualgrid(&self.grid, dk2, self.convention).total(),
        }
    }
}

/// Couplings that vanish identically.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoCoupling;

impl Couplings for NoCoupling {
    fn zeta(&self, _: f64, _: f64, _: f64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn xi(&self, _: f64, _: f64, _: f64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FullOptions {
    /// Largest `ε` used; the extrapolation also evaluates `ε/2` and `ε/4`.
    pub epsilon: f64,
    /// The ω₂ integral runs over `[s − half_window, s + half_window]` with
    /// `s = ω₁′ + ω₁″`.
    pub half_window: f64,
    /// Richardson extrapolation `ε → 0`. Without it the value at `epsilon`
    /// is returned.
    pub extrapolate: bool,
    pub quad: QuadOptions,
}

impl Default for FullOptions {
    fn default() -> Self {
        FullOptions {
            epsilon: 1e-3,
            half_window: 1.0,
            extrapolate: true,
            quad: QuadOptions { abs_tol: 1e-13, rel_tol: 1e-10, max_intervals: 4000 },
        }
    }
}

/// `(i/π) E_L(ω) ∫ ζ(ω,ω₁,ω₂) ξ(ω₁′,ω₁″,ω₂) / (ω₁′+ω₁″−ω₂+iε) dω₂`, with the
/// normalisation `N₂²` absorbed into the amplitude scale.
pub fn amplitude_full<C: Couplings + ?Sized>(
    nu: (f64, f64, f64),
    couplings: &C,
    pulse: &PumpPulse,
    opts: &FullOptions,
) -> Result<Complex64> {
    pulse.validate()?;
    if !(opts.epsilon > 0.0) {
        return Err(Error::config("epsilon", "must be positive"));
    }
    if !(opts.half_window > 0.0) {
        return Err(Error::config("half_window", "must be positive"));
    }
    let c = pulse.subharmonic();
    let (w1, wa, wb) = (c + nu.0, c + nu.1, c + nu.2);
    let omega = w1 + wa + wb;
    let s = wa + wb;
    let e = pump_spectrum(pulse, omega);
    if e == Complex64::new(0.0, 0.0) {
        return Ok(e);
    }
    let at = |eps: f64| pole_integral(|w2| couplings.zeta(omega, w1, w2) * couplings.xi(wa, wb, w2), s, eps, opts);
    let value = if opts.extrapolate {
        let a1 = at(opts.epsilon)?;
        let a2 = at(opts.epsilon / 2.0)?;
        let a4 = at(opts.epsilon / 4.0)?;
        (8.0 * a4 - 6.0 * a2 + a1) / 3.0
    } else {
        at(opts.epsilon)?
    };
    Ok(Complex64::new(0.0, 1.0 / PI) * e * value)
}

/// `∫ g(ω)/(s − ω + iε) dω` over the window around `s`. The pole part
/// `g(s)·∫ dω/(s−ω+iε)` is done analytically.
fn pole_integral<G: Fn(f64) -> Complex64>(g: G, s: f64, eps: f64, opts: &FullOptions) -> Result<Complex64> {
    let w = opts.half_window;
    let gs = g(s);
    let rest = integrate(
        |x| {
            let u = s - x;
            (g(x) - gs) / Complex64::new(u, eps)
        },
        s - w,
        s + w,
        &[s],
        opts.quad,
    )
    .map_err(|e| Error::Numerical(format!("ω₂ quadrature at ε = {eps:.3e}: {e}")))?;
    // ∫_{−w}^{w} du/(u + iε) = ln((w + iε)/(−w + iε))
    let log = (Complex64::new(w, eps) / Complex64::new(-w, eps)).ln();
    Ok(rest.value + gs * log)
}

/// Resonant reduction: all factors evaluated at `ω₂ = ω₁′ + ω₁″`.
pub fn amplitude_resonant<C: Couplings + ?Sized>(nu: (f64, f64, f64), couplings: &C, pulse: &PumpPulse) -> Complex64 {
    let c = pulse.subharmonic();
    let (w1, wa, wb) = (c + nu.0, c + nu.1, c + nu.2);
    let omega = w1 + wa + wb;
    let s = wa + wb;
    pump_spectrum(pulse, omega) * couplings.zeta(omega, w1, s) * couplings.xi(wa, wb, s)
}
