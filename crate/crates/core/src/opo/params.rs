use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Cavity OPO parameters in rate units (γ = 1 sets the time scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpoParams {
    /// Drive amplitude `|E|`.
    pub e: f64,
    /// Drive phase Φ.
    #[serde(default)]
    pub phi: f64,
    pub zeta_p: f64,
    pub xi_p: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl OpoParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("e", self.e),
            ("zeta_p", self.zeta_p),
            ("xi_p", self.xi_p),
            ("gamma0", self.gamma0),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("params.{name}"), "must be finite and ≥ 0"));
            }
        }
        if !self.phi.is_finite() {
            return Err(Error::config("params.phi", "must be finite"));
        }
        Ok(())
    }

    /// Complex drive `E e^{iΦ}`.
    pub fn drive(&self) -> Complex64 {
        Complex64::from_polar(self.e, self.phi)
    }

    /// `E_th = (2γ₀/3ζ′) √(2γ₁γ₂)`.
    pub fn threshold(&self) -> Result<f64> {
        threshold(self)
    }

    pub fn ratio(&self) -> Result<f64> {
        Ok(self.e / self.threshold()?)
    }

    /// Copy with the drive set to `ε E_th`.
    pub fn with_ratio(&self, eps: f64) -> Result<Self> {
        Ok(OpoParams { e: eps * self.threshold()?, ..*self })
    }
}

pub fn threshold(p: &OpoParams) -> Result<f64> {
    if p.zeta_p <= 0.0 {
        return Err(Error::Domain("threshold undefined for ζ′ = 0".into()));
    }
    Ok(2.0 * p.gamma0 / (3.0 * p.zeta_p) * (2.0 * p.gamma1 * p.gamma2).sqrt())
}
