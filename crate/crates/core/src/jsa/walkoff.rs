use crate::qpm::{DispersionTable, Polarization};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

fn pidx(p: Polarization) -> usize {
    match p {
        Polarization::O => 0,
        Polarization::E => 1,
    }
}

/// Temporal walkoffs of a dual-section lattice, indexed by photon and
/// polarization (`[o, e]`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkoffSet {
    /// `T_{i,α}`, pump against daughter `i ∈ {1,2,3}` over one first-section domain.
    pub big_t: [[f64; 2]; 3],
    /// `t_{μ,γ}`, ω₂ against daughter `μ ∈ {2,3}` over one nonlinear second-section domain.
    pub small_t: [[f64; 2]; 2],
    /// `ϱ_{μ,γ}`, the same over one linear spacer.
    pub rho: [[f64; 2]; 2],
    pub m: usize,
    pub n: usize,
    pub tau_p: f64,
}

impl WalkoffSet {
    pub fn big_t(&self, i: usize, p: Polarization) -> f64 {
        self.big_t[i - 1][pidx(p)]
    }

    pub fn small_t(&self, mu: usize, p: Polarization) -> f64 {
        self.small_t[mu - 2][pidx(p)]
    }

    pub fn rho(&self, mu: usize, p: Polarization) -> f64 {
        self.rho[mu - 2][pidx(p)]
    }

    /// `t_{μ,γ} + ϱ_{μ,γ}`.
    pub fn second_section(&self, mu: usize, p: Polarization) -> f64 {
        self.small_t(mu, p) + self.rho(mu, p)
    }

    /// Walkoffs from inverse group velocities. Daughters share a carrier,
    /// so `T`, `t`, `ϱ` depend on the photon index only through polarization.
    pub fn from_inverse_velocities(v: &InverseVelocities, lengths: (f64, f64, f64), m: usize, n: usize, tau_p: f64) -> Self {
        let (l1, l2, l3) = lengths;
        let t1 = [l1 * (v.pump - v.daughter[0]), l1 * (v.pump - v.daughter[1])];
        let t2 = [l2 * (v.intermediate - v.daughter[0]), l2 * (v.intermediate - v.daughter[1])];
        let r = [l3 * (v.spacer_intermediate - v.spacer_daughter[0]), l3 * (v.spacer_intermediate - v.spacer_daughter[1])];
        WalkoffSet { big_t: [t1; 3], small_t: [t2; 2], rho: [r; 2], m, n, tau_p }
    }
}

/// Inverse group velocities (s/m). Arrays are `[o, e]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseVelocities {
    pub pump: f64,
    pub daughter: [f64; 2],
    pub intermediate: f64,
    pub spacer_intermediate: f64,
    pub spacer_daughter: [f64; 2],
}

/// Which table entries play which role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkoffRequest {
    pub nonlinear_material: String,
    #[serde(default)]
    pub spacer_material: Option<String>,
    pub pump_mode: String,
    /// ω₂ mode (its polarization β is whatever the table says).
    pub intermediate_mode: String,
    pub daughter_o_mode: String,
    pub daughter_e_mode: String,
}

impl WalkoffRequest {
    pub fn inverse_velocities(&self, table: &DispersionTable) -> Result<InverseVelocities> {
        let nl = &self.nonlinear_material;
        let u = |mat: &str, mode: &str| table.lookup(mat, mode).map(|m| m.inv_group_velocity);
        let pump = u(nl, &self.pump_mode)?;
        let daughter = [u(nl, &self.daughter_o_mode)?, u(nl, &self.daughter_e_mode)?];
        let intermediate = u(nl, &self.intermediate_mode)?;
        let (spacer_intermediate, spacer_daughter) = match &self.spacer_material {
            Some(sp) => (
                u(sp, &self.intermediate_mode)?,
                [u(sp, &self.daughter_o_mode)?, u(sp, &self.daughter_e_mode)?],
            ),
            None => (0.0, [0.0, 0.0]),
        };
        Ok(InverseVelocities { pump, daughter, intermediate, spacer_intermediate, spacer_daughter })
    }
}

/// `T = l₁(u_L⁻¹ − u_{i,α}⁻¹)`, `t = l₂(u_β⁻¹ − u_{μ,γ}⁻¹)`, `ϱ = l₃(υ_β⁻¹ − υ_{μ,γ}⁻¹)`.
/// Without a spacer material, `ϱ = 0`.
pub fn compute_walkoffs(
    table: &DispersionTable,
    req: &WalkoffRequest,
    lengths: (f64, f64, f64),
    m: usize,
    n: usize,
    tau_p: f64,
) -> Result<WalkoffSet> {
    if !(tau_p > 0.0) {
        return Err(Error::config("pulse.tau_p", "must be positive"));
    }
    let v = req.inverse_velocities(table)?;
    Ok(WalkoffSet::from_inverse_velocities(&v, lengths, m, n, tau_p))
}

/// Coefficient of `T T` in the (ν₂,ν₃) pair factor. The printed form has
/// `(M²+1)/10` there while the other pair factors and the factorization
/// condition on (ν₂,ν₃) use `M²/10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PairCoefficient {
    #[default]
    Consistent,
    Printed,
}

/// `log Φ = −Σ aₖνₖ² − c₁₂ν₁ν₂ − c₁₃ν₁ν₃ − c₂₃ν₂ν₃ − i p·ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianForm {
    pub a: [f64; 3],
    pub c12: f64,
    pub c13: f64,
    pub c23: f64,
    pub phase: [f64; 3],
}

impl GaussianForm {
    pub fn eval(&self, nu: (f64, f64, f64)) -> Complex64 {
        let (x, y, z) = nu;
        let re = -self.a[0] * x * x - self.a[1] * y * y - self.a[2] * z * z - self.c12 * x * y - self.c13 * x * z - self.c23 * y * z;
        let im = -(self.phase[0] * x + self.phase[1] * y + self.phase[2] * z);
        Complex64::new(re, im).exp()
    }
}

pub fn gaussian_form(w: &WalkoffSet, pols: [Polarization; 3], coeff: PairCoefficient) -> GaussianForm {
    let [al, be, ga] = pols;
    let tau2 = w.tau_p * w.tau_p;
    let m2 = (w.m * w.m) as f64;
    let n2 = (w.n * w.n) as f64;
    let (t1, t2, t3) = (w.big_t(1, al), w.big_t(2, be), w.big_t(3, ga));
    let (s2, s3) = (w.second_section(2, be), w.second_section(3, ga));
    let k23 = match coeff {
        PairCoefficient::Consistent => m2 / 10.0,
        PairCoefficient::Printed => (m2 + 1.0) / 10.0,
    };
    GaussianForm {
        a: [
            tau2 / 2.0 + m2 / 20.0 * t1 * t1,
            tau2 / 2.0 + m2 / 20.0 * t2 * t2 + n2 / 80.0 * s2 * s2,
            tau2 / 2.0 + m2 / 20.0 * t3 * t3 + n2 / 80.0 * s3 * s3,
        ],
        c12: tau2 + m2 / 10.0 * t1 * t2,
        c13: tau2 + m2 / 10.0 * t1 * t3,
        // photon labels as printed: T_{2,α} T_{3,β}
        c23: tau2 + k23 * w.big_t(2, al) * w.big_t(3, be) + n2 / 40.0 * s2 * s3,
        phase: [
            w.m as f64 / 2.0 * t1,
            w.m as f64 / 2.0 * t2 + w.n as f64 / 4.0 * s2,
            w.m as f64 / 2.0 * t3 + w.n as f64 / 4.0 * s3,
        ],
    }
}

/// Gaussian walkoff amplitude for the polarization triple `(α, β, γ)`.
pub fn amplitude_gaussian(nu: (f64, f64, f64), w: &WalkoffSet, pols: [Polarization; 3], coeff: PairCoefficient) -> Complex64 {
    gaussian_form(w, pols, coeff).eval(nu)
}

/// Residuals of the factorization conditions for the `eoo` triple. Zero
/// means the corresponding pair of photons is spectrally uncorrelated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeraldingResiduals {
    pub r12: f64,
    pub r13: f64,
    pub r23: f64,
}

pub fn heralding_residuals(w: &WalkoffSet) -> HeraldingResiduals {
    use Polarization::{E, O};
    let tau2 = w.tau_p * w.tau_p;
    let m2 = (w.m * w.m) as f64;
    let n2 = (w.n * w.n) as f64;
    HeraldingResiduals {
        r12: tau2 + m2 / 10.0 * w.big_t(1, E) * w.big_t(2, O),
        r13: tau2 + m2 / 10.0 * w.big_t(1, E) * w.big_t(3, O),
        r23: tau2 + m2 / 10.0 * w.big_t(2, E) * w.big_t(3, O) + n2 / 40.0 * w.second_section(2, O) * w.second_section(3, O),
    }
}

/// Lengths `(l₁, l₃)` that zero `r₁₂ = r₁₃` and the spacer term of `r₂₃`
/// for the `eoo` triple. `l₁` needs the pump group delay strictly between
/// the two daughter polarizations; `l₃` needs a spacer whose ω₂/o walkoff
/// has the opposite sign to the nonlinear one.
pub fn factorizing_lengths(v: &InverseVelocities, tau_p: f64, m: usize, l2: f64) -> Result<(f64, f64)> {
    let po = v.pump - v.daughter[0];
    let pe = v.pump - v.daughter[1];
    let prod = po * pe;
    if !(prod < 0.0) || m == 0 {
        return Err(Error::Infeasible {
            reason: "pump group delay must lie strictly between the o and e daughter group delays".into(),
            residuals: vec![("T_o·T_e per unit length²".into(), prod)],
        });
    }
    let l1 = (10.0 * tau_p * tau_p / ((m * m) as f64 * -prod)).sqrt();
    let t_nl = v.intermediate - v.daughter[0];
    let t_sp = v.spacer_intermediate - v.spacer_daughter[0];
    let l3 = if t_nl == 0.0 {
        0.0
    } else if t_sp != 0.0 && t_nl * t_sp < 0.0 {
        -l2 * t_nl / t_sp
    } else {
        return Err(Error::Infeasible {
            reason: "spacer walkoff must have the opposite sign to the nonlinear-domain walkoff".into(),
            residuals: vec![("t_o per unit length".into(), t_nl), ("ϱ_o per unit length".into(), t_sp)],
        });
    };
    Ok((l1, l3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use Polarization::{E, O};

    fn velocities() -> InverseVelocities {
        InverseVelocities {
            pump: 1.0,
            daughter: [0.8, 1.3],
            intermediate: 1.1,
            spacer_intermediate: 0.7,
            spacer_daughter: [0.95, 1.0],
        }
    }

    #[test]
    fn walkoff_arithmetic() {
        let v = InverseVelocities { pump: 2.0, daughter: [1.0, 2.0], intermediate: 0.0, spacer_intermediate: 0.0, spacer_daughter: [0.0; 2] };
        let w = WalkoffSet::from_inverse_velocities(&v, (3.0, 1.0, 1.0), 1, 1, 1.0);
        assert_eq!(w.big_t(1, O), 3.0);
        assert_eq!(w.big_t(1, E), 0.0);
        assert_eq!(w.big_t(2, O), w.big_t(3, O));
    }

    #[test]
    fn printed_residual_example() {
        let mut w = WalkoffSet::from_inverse_velocities(&velocities(), (1.0, 1.0, 0.0), 10, 4, 1.0);
        w.big_t[0][1] = -0.5;
        w.big_t[1][0] = 0.2;
        assert_relative_eq!(heralding_residuals(&w).r12, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn same_sign_walkoffs_cannot_herald() {
        let mut v = velocities();
        v.daughter = [0.8, 0.9];
        for tau in [0.1, 1.0, 10.0] {
            let w = WalkoffSet::from_inverse_velocities(&v, (2.0, 1.0, 0.0), 10, 4, tau);
            assert!(heralding_residuals(&w).r12 > 0.0);
        }
        assert!(matches!(factorizing_lengths(&v, 1.0, 10, 1.0), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn factorizing_lengths_zero_the_residuals() {
        let v = velocities();
        let (l1, l3) = factorizing_lengths(&v, 1.5, 12, 0.7).unwrap();
        let w = WalkoffSet::from_inverse_velocities(&v, (l1, 0.7, l3), 12, 6, 1.5);
        let r = heralding_residuals(&w);
        assert!(r.r12.abs() < 1e-12 && r.r13.abs() < 1e-12 && r.r23.abs() < 1e-12, "{r:?}");
        assert!(w.second_section(2, O).abs() < 1e-15);
    }

    #[test]
    fn zero_walkoff_collapses_to_pump_correlation() {
        let w = WalkoffSet { big_t: [[0.0; 2]; 3], small_t: [[0.0; 2]; 2], rho: [[0.0; 2]; 2], m: 7, n: 4, tau_p: 0.8 };
        for coeff in [PairCoefficient::Consistent, PairCoefficient::Printed] {
            let nu = (0.3, -0.7, 1.1);
            let a = amplitude_gaussian(nu, &w, [E, O, O], coeff);
            let s: f64 = nu.0 + nu.1 + nu.2;
            assert_relative_eq!(a.norm(), (-0.64 * s * s / 2.0).exp(), max_relative = 1e-14);
        }
    }

    #[test]
    fn unit_magnitude_at_origin() {
        let w = WalkoffSet::from_inverse_velocities(&velocities(), (0.3, 0.2, 0.1), 10, 4, 1.0);
        assert_relative_eq!(amplitude_gaussian((0.0, 0.0, 0.0), &w, [E, O, O], PairCoefficient::Printed).norm(), 1.0);
    }

    #[test]
    fn coefficient_variants_differ_only_in_c23() {
        let w = WalkoffSet::from_inverse_velocities(&velocities(), (0.3, 0.2, 0.1), 10, 4, 1.0);
        let a = gaussian_form(&w, [E, O, O], PairCoefficient::Consistent);
        let b = gaussian_form(&w, [E, O, O], PairCoefficient::Printed);
        assert_eq!((a.a, a.c12, a.c13, a.phase), (b.a, b.c12, b.c13, b.phase));
        assert_relative_eq!(b.c23 - a.c23, w.big_t(2, E) * w.big_t(3, O) / 10.0, max_relative = 1e-12);
    }

    #[test]
    fn missing_mode_is_config_error() {
        let table = DispersionTable::new(vec![]);
        let req = WalkoffRequest {
            nonlinear_material: "ktp".into(),
            spacer_material: None,
            pump_mode: "pump".into(),
            intermediate_mode: "w2".into(),
            daughter_o_mode: "w1o".into(),
            daughter_e_mode: "w1e".into(),
        };
        assert!(matches!(compute_walkoffs(&table, &req, (1.0, 1.0, 1.0), 1, 1, 1.0), Err(Error::Config { .. })));
    }
}
