use super::params::OpoParams;
use super::semiclassical::{semiclassical_steady, Branch};
use crate::ode::{Dopri, OdeOptions};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Mean-field right-hand side for `(α₀, α₁, α₂)`:
/// `α̇₀ = E − γ₀α₀ − ζ′α₁α₂`,
/// `α̇₁ = −γ₁α₁ + ζ′α₀α₂* + 2ξ′α₁*α₂`,
/// `α̇₂ = −γ₂α₂ + ζ′α₀α₁* − ξ′α₁²`.
pub fn meanfield_rhs(p: &OpoParams, a: &[Complex64; 3]) -> [Complex64; 3] {
    let [a0, a1, a2] = *a;
    [
        p.drive() - a0 * p.gamma0 - a1 * a2 * p.zeta_p,
        -a1 * p.gamma1 + a0 * a2.conj() * p.zeta_p + a1.conj() * a2 * (2.0 * p.xi_p),
        -a2 * p.gamma2 + a0 * a1.conj() * p.zeta_p - a1 * a1 * p.xi_p,
    ]
}

/// Subharmonic equations with the pump clamped at `α₀ = E/γ₀`.
pub fn meanfield_rhs_adiabatic(p: &OpoParams, a1: Complex64, a2: Complex64) -> [Complex64; 2] {
    let a0 = p.drive() / p.gamma0;
    let [_, d1, d2] = meanfield_rhs(p, &[a0, a1, a2]);
    [d1, d2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryReport {
    pub alpha: [Complex64; 3],
    pub n1: f64,
    pub n2: f64,
    pub phi1: f64,
    pub phi2: f64,
    /// `|α̇|` at the final time.
    pub residual: f64,
    pub stationary: bool,
}

impl StationaryReport {
    fn at(p: &OpoParams, alpha: [Complex64; 3]) -> Self {
        let d = meanfield_rhs(p, &alpha);
        let residual = d.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let scale = 1.0 + alpha.iter().map(|v| v.norm()).fold(0.0, f64::max);
        StationaryReport {
            alpha,
            n1: alpha[1].norm_sqr(),
            n2: alpha[2].norm_sqr(),
            phi1: alpha[1].arg(),
            phi2: alpha[2].arg(),
            residual,
            stationary: residual < 1e-6 * scale * (p.gamma0 + p.gamma1 + p.gamma2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSeries {
    pub times: Vec<f64>,
    pub alpha: Vec<[Complex64; 3]>,
}

pub fn meanfield_integrate(
    p: &OpoParams,
    init: [Complex64; 3],
    t_grid: &[f64],
) -> Result<(MeanFieldSeries, StationaryReport)> {
    p.validate()?;
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::config("t_grid", "must be non-empty and non-decreasing"));
    }
    let rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let d = meanfield_rhs(p, &[y[0], y[1], y[2]]);
        dy.copy_from_slice(&d);
        Ok(())
    };
    let opts = OdeOptions { rtol: 1e-10, atol: 1e-12, h0: 1e-4, ..Default::default() };
    let mut solver = Dopri::new(rhs, 3, opts);
    let mut y = init.to_vec();
    let mut t = t_grid[0];
    let mut series = MeanFieldSeries { times: Vec::new(), alpha: Vec::new() };
    for &tg in t_grid {
        let before = y.clone();
        if let Err(e) = solver.integrate(&mut t, &mut y, tg) {
            return Err(Error::Numerical(format!(
                "mean-field integration failed ({e}); last stable state at t = {t}: {before:?}"
            )));
        }
        series.times.push(t);
        series.alpha.push([y[0], y[1], y[2]]);
    }
    let last = *series.alpha.last().expect("non-empty grid");
    Ok((series, StationaryReport::at(p, last)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BistabilityPoint {
    pub eps: f64,
    pub from_trivial: StationaryReport,
    pub from_bright: StationaryReport,
    /// Both starts stay on distinct stable attractors.
    pub coexist: bool,
}

/// Runs every ratio twice, from a weakly seeded trivial state and from the
/// bright branch, and reports where the two attractors coexist.
pub fn bistability_scan(p: &OpoParams, eps_values: &[f64], t_end: f64) -> Result<Vec<BistabilityPoint>> {
    let mut out = Vec::with_capacity(eps_values.len());
    for &eps in eps_values {
        let q = p.with_ratio(eps)?;
        let a0 = q.drive() / q.gamma0;
        let seed = Complex64::new(1e-3, 0.0);
        let (_, from_trivial) = meanfield_integrate(&q, [a0, seed, seed], &[0.0, t_end])?;
        let sc = semiclassical_steady(&q, eps.max(1.0))?;
        let (phi1, phi2) = sc.phases[0];
        let start = [a0, Complex64::from_polar(sc.n1.sqrt(), phi1), Complex64::from_polar(sc.n2.sqrt(), phi2)];
        let (_, from_bright) = meanfield_integrate(&q, start, &[0.0, t_end])?;
        let dark = from_trivial.n1 < 1e-6;
        let bright = sc.branch == Branch::Bright && from_bright.n1 > 0.5 * sc.n1 && from_bright.stationary;
        out.push(BistabilityPoint { eps, coexist: dark && bright && from_trivial.stationary, from_trivial, from_bright });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base() -> OpoParams {
        OpoParams { e: 0.0, phi: 0.0, zeta_p: 0.2, xi_p: 0.1, gamma0: 1.0, gamma1: 1.0, gamma2: 1.0 }
    }

    #[test]
    fn no_drive_decays() {
        let p = base();
        let one = Complex64::new(1.0, 0.5);
        let (_, rep) = meanfield_integrate(&p, [one, one, one], &[0.0, 40.0]).unwrap();
        assert!(rep.alpha.iter().all(|a| a.norm() < 1e-12));
    }

    #[test]
    fn closed_form_is_adiabatic_fixed_point() {
        for &eps in &[1.0, 1.1, 1.4, 2.0] {
            let p = base().with_ratio(eps).unwrap();
            let s = semiclassical_steady(&p, eps).unwrap();
            for &(f1, f2) in &s.phases {
                let d = meanfield_rhs_adiabatic(&p, Complex64::from_polar(s.n1.sqrt(), f1), Complex64::from_polar(s.n2.sqrt(), f2));
                assert!(d[0].norm() < 1e-12 && d[1].norm() < 1e-12, "eps {eps}: {d:?}");
            }
        }
    }

    #[test]
    fn phase_locking_with_drive_phase() {
        let mut p = base().with_ratio(1.3).unwrap();
        p.phi = 0.9;
        let s = semiclassical_steady(&p, 1.3).unwrap();
        for &(f1, f2) in &s.phases {
            let d = meanfield_rhs_adiabatic(&p, Complex64::from_polar(s.n1.sqrt(), f1), Complex64::from_polar(s.n2.sqrt(), f2));
            assert!(d[0].norm() < 1e-12 && d[1].norm() < 1e-12);
        }
        assert_relative_eq!(s.phases[1].0 - s.phases[0].0, 2.0 * std::f64::consts::PI / 3.0);
    }
}
