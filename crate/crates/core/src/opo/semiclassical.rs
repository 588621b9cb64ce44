use super::params::OpoParams;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    BelowThreshold,
    Bright,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub branch: Branch,
    pub n1: f64,
    pub n2: f64,
    /// `(φ₁, φ₂)` for the three locked solutions.
    pub phases: [(f64, f64); 3],
}

/// Bright-branch photon numbers and locked phases at `ε = E/E_th`:
/// `n₁ = γ₁γ₂/(18ξ′²)(ε+3√(ε²−1))²`,
/// `n₂ = γ₁²/(36ξ′²)((ε+3√(ε²−1))/(ε+√(ε²−1)))²`,
/// `φ₁ = Φ/3 + 2πn/3`, `φ₂ = 2φ₁ = 2Φ/3 − 2πn/3` (mod 2π). The two
/// expressions coincide for Φ = 0; for a phased drive only the latter is a
/// fixed point of the mean-field equations.
///
/// Below threshold the trivial branch is returned with zero occupations.
pub fn semiclassical_steady(p: &OpoParams, eps: f64) -> Result<SteadyState> {
    if !(p.xi_p > 0.0) {
        return Err(Error::Domain("steady state needs ξ′ > 0".into()));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::Domain(format!("ratio ε = {eps} must be finite and ≥ 0")));
    }
    let phases = [0usize, 1, 2].map(|n| {
        let k = 2.0 * PI * n as f64 / 3.0;
        (p.phi / 3.0 + k, 2.0 * p.phi / 3.0 - k)
    });
    if eps < 1.0 {
        return Ok(SteadyState { branch: Branch::BelowThreshold, n1: 0.0, n2: 0.0, phases });
    }
    let s = (eps * eps - 1.0).sqrt();
    let x2 = p.xi_p * p.xi_p;
    let n1 = p.gamma1 * p.gamma2 / (18.0 * x2) * (eps + 3.0 * s).powi(2);
    let n2 = p.gamma1 * p.gamma1 / (36.0 * x2) * ((eps + 3.0 * s) / (eps + s)).powi(2);
    Ok(SteadyState { branch: Branch::Bright, n1, n2, phases })
}
