//! Discrete-mode cascaded Hamiltonians, second-order perturbative states,
//! the frequency-uncorrelated triplet and the polarization GHZ state.
//!
//! ħ = 1. Coupling rates are real; the pump amplitude `E₀` may be complex.

use crate::fock::{expm_apply, inner, norm_sqr, Ladder, Register, SparseMatrix};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub const DEFAULT_CUTOFF: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhotonPolarization {
    V,
    H,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub label: String,
    #[serde(default)]
    pub polarization: Option<PhotonPolarization>,
    /// Largest photon number kept.
    #[serde(default = "default_cutoff")]
    pub fock_cutoff: usize,
}

fn default_cutoff() -> usize {
    DEFAULT_CUTOFF
}

impl ModeSpec {
    pub fn new(label: &str, polarization: Option<PhotonPolarization>, fock_cutoff: usize) -> Self {
        ModeSpec { label: label.into(), polarization, fock_cutoff }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRegister {
    pub modes: Vec<ModeSpec>,
}

impl ModeRegister {
    pub fn new(modes: Vec<ModeSpec>) -> Result<Self> {
        for (i, m) in modes.iter().enumerate() {
            if m.fock_cutoff < 1 {
                return Err(Error::config(format!("modes[{i}].fock_cutoff"), "must be ≥ 1"));
            }
            if modes[..i].iter().any(|o| o.label == m.label) {
                return Err(Error::config(format!("modes[{i}].label"), format!("duplicate label `{}`", m.label)));
            }
        }
        Ok(ModeRegister { modes })
    }

    /// Register `b, a1, a2, a3` used for the triplet.
    pub fn triplet(cutoff: usize) -> Result<Self> {
        Self::new(["b", "a1", "a2", "a3"].iter().map(|l| ModeSpec::new(l, None, cutoff)).collect())
    }

    /// Register `a1 (V), a2 (H), b1 (V), b2 (H)` used for the GHZ construction.
    pub fn ghz(cutoff: usize) -> Result<Self> {
        use PhotonPolarization::{H, V};
        Self::new(vec![
            ModeSpec::new("a1", Some(V), cutoff),
            ModeSpec::new("a2", Some(H), cutoff),
            ModeSpec::new("b1", Some(V), cutoff),
            ModeSpec::new("b2", Some(H), cutoff),
        ])
    }

    pub fn fock(&self) -> Result<Register> {
        Register::from_cutoffs(&self.modes.iter().map(|m| m.fock_cutoff).collect::<Vec<_>>())
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::config("modes", format!("register has no mode labelled `{label}`")))
    }

    fn require(&self, label: &str, pol: PhotonPolarization) -> Result<usize> {
        let k = self.position(label)?;
        match self.modes[k].polarization {
            Some(p) if p == pol => Ok(k),
            other => Err(Error::config(
                format!("modes[{k}].polarization"),
                format!("mode `{label}` must carry polarization {pol:?}, found {other:?}"),
            )),
        }
    }

    pub fn basis_label(&self, reg: &Register, index: usize) -> String {
        let parts: Vec<String> = self
            .modes
            .iter()
            .enumerate()
            .map(|(k, m)| format!("{}={}", m.label, reg.occupation(index, k)))
            .collect();
        format!("|{}>", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    pub register: ModeRegister,
    pub amplitudes: Vec<Complex64>,
}

/// JSON form of a state vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub schema_version: u32,
    pub basis_labels: Vec<String>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl PureState {
    pub fn vacuum(register: &ModeRegister) -> Result<Self> {
        let reg = register.fock()?;
        let mut amplitudes = vec![ZERO; reg.dim()];
        amplitudes[0] = ONE;
        Ok(PureState { register: register.clone(), amplitudes })
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amplitudes).sqrt()
    }

    pub fn amplitude(&self, occupations: &[usize]) -> Result<Complex64> {
        let reg = self.register.fock()?;
        if occupations.len() != reg.modes() || occupations.iter().zip(reg.levels()).any(|(n, l)| n >= l) {
            return Err(Error::Domain(format!("occupation {occupations:?} outside the register")));
        }
        Ok(self.amplitudes[reg.index(occupations)])
    }

    /// Only nonzero amplitudes are listed.
    pub fn dump(&self) -> Result<StateDump> {
        let reg = self.register.fock()?;
        let mut d = StateDump { schema_version: crate::SCHEMA_VERSION, basis_labels: vec![], re: vec![], im: vec![] };
        for (i, a) in self.amplitudes.iter().enumerate() {
            if *a != ZERO {
                d.basis_labels.push(self.register.basis_label(&reg, i));
                d.re.push(a.re);
                d.im.push(a.im);
            }
        }
        Ok(d)
    }
}

/// `H₁ = i(ζ′E₀ b†a₁† − ζ′E₀* b a₁)`, `H₂ = i(ξ′ a₂†a₃† b − ξ′ b† a₂ a₃)`.
pub fn build_triplet_hamiltonians(
    register: &ModeRegister,
    zeta_p: f64,
    xi_p: f64,
    e0: Complex64,
) -> Result<(SparseMatrix, SparseMatrix)> {
    let reg = register.fock()?;
    let (b, a1, a2, a3) = (
        register.position("b")?,
        register.position("a1")?,
        register.position("a2")?,
        register.position("a3")?,
    );
    use Ladder::{Annihilate as A, Create as C};
    let g = I * zeta_p * e0;
    let h1 = SparseMatrix::word(&reg, g, &[C(b), C(a1)]).add(&SparseMatrix::word(&reg, g.conj(), &[A(b), A(a1)]));
    let h2 = SparseMatrix::word(&reg, I * xi_p, &[C(a2), C(a3), A(b)])
        .add(&SparseMatrix::word(&reg, -I * xi_p, &[C(b), A(a2), A(a3)]));
    Ok((h1, h2))
}

/// Second-order Dyson term `(−i)² ∫₀ᵗ∫₀^{t′} H H ψ₀ = −(t²/2) H² ψ₀`.
pub fn dyson_second_order(h: &SparseMatrix, t: f64, psi0: &[Complex64]) -> Vec<Complex64> {
    let hpsi = h.mul_vec(psi0);
    h.mul_vec(&hpsi).into_iter().map(|v| v * (-0.5 * t * t)).collect()
}

/// Ordered product `−t² H₂ H₁ ψ₀`, which creates the triplet from vacuum.
pub fn ordered_second_order(h1: &SparseMatrix, h2: &SparseMatrix, t: f64, psi0: &[Complex64]) -> Vec<Complex64> {
    let x = h1.mul_vec(psi0);
    h2.mul_vec(&x).into_iter().map(|v| v * (-t * t)).collect()
}

/// Exact `exp(−iHt) ψ₀` in the truncated basis.
pub fn exact_evolution(h: &SparseMatrix, t: f64, psi0: &[Complex64]) -> Vec<Complex64> {
    expm_apply(h, t, psi0)
}

/// Frequency-uncorrelated triplet `−t² H₂H₁|0⟩` with `ζ̄ = tζ′`, `ξ̄ = tξ′`.
/// The amplitude on `|0_b,1,1,1⟩` is `E₀ ζ̄ ξ̄`.
pub fn triplet_state(register: &ModeRegister, zeta_p: f64, xi_p: f64, e0: Complex64, t: f64) -> Result<PureState> {
    let (h1, h2) = build_triplet_hamiltonians(register, zeta_p, xi_p, e0)?;
    let vac = PureState::vacuum(register)?;
    Ok(PureState { register: register.clone(), amplitudes: ordered_second_order(&h1, &h2, t, &vac.amplitudes) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhzCouplings {
    /// `χ̄ = tχ`.
    pub chi_bar: f64,
    pub k_v: f64,
    pub k_h: f64,
    pub e0: Complex64,
}

impl GhzCouplings {
    pub fn equal(chi_bar: f64, k_bar: f64, e0: Complex64) -> Self {
        GhzCouplings { chi_bar, k_v: k_bar, k_h: k_bar, e0 }
    }
}

#[derive(Debug, Clone)]
pub struct GhzReport {
    /// Occupancy form on `a1 (V), a2 (H), b1 (V), b2 (H)`: `∝ |2,1⟩ + |1,2⟩`.
    pub occupancy: PureState,
    /// Split form: first photon in `p1`, the down-converted pair in `p2, p3`.
    pub split: PureState,
    /// `|⟨GHZ|ψ⟩|²/⟨ψ|ψ⟩` for the split form; 0 when ψ vanishes.
    pub fidelity: f64,
    /// Same overlap for the occupancy form against `(|2,1⟩+|1,2⟩)/√2`.
    pub occupancy_fidelity: f64,
    /// Squared norm of the three-photon component of the split form.
    pub triplet_weight: f64,
    pub amplitude_vhh: Complex64,
    pub amplitude_hvv: Complex64,
}

/// GHZ construction from `H₁ = iχE₀(a₁†b₂† + a₂†b₁†) + h.c.` and
/// `H₂ = ik(b₁a₁†² + b₂a₂†²) + h.c.`, applied as `−H₂H₁|0⟩` in the reduced
/// units `χ̄ = tχ`, `k̄ = tk`.
///
/// The occupancy form keeps both ω₁ photons of a polarization in one mode.
/// The split form gives each of the three photons its own spatial mode with
/// a V and an H register, so `b_V → a₂V a₃V` and `b_H → a₂H a₃H`; this is
/// the basis in which `|VHH⟩ + |HVV⟩` is read off.
pub fn ghz_state(register: &ModeRegister, c: GhzCouplings) -> Result<GhzReport> {
    use Ladder::{Annihilate as A, Create as Cr};
    use PhotonPolarization::{H, V};
    let (a1, a2, b1, b2) = (register.require("a1", V)?, register.require("a2", H)?, register.require("b1", V)?, register.require("b2", H)?);
    let reg = register.fock()?;
    let g = I * c.chi_bar * c.e0;
    let h1 = SparseMatrix::word(&reg, g, &[Cr(a1), Cr(b2)])
        .add(&SparseMatrix::word(&reg, g, &[Cr(a2), Cr(b1)]))
        .add(&SparseMatrix::word(&reg, g.conj(), &[A(a1), A(b2)]))
        .add(&SparseMatrix::word(&reg, g.conj(), &[A(a2), A(b1)]));
    let h2 = SparseMatrix::word(&reg, I * c.k_v, &[Cr(a1), Cr(a1), A(b1)])
        .add(&SparseMatrix::word(&reg, I * c.k_h, &[Cr(a2), Cr(a2), A(b2)]))
        .add(&SparseMatrix::word(&reg, -I * c.k_v, &[Cr(b1), A(a1), A(a1)]))
        .add(&SparseMatrix::word(&reg, -I * c.k_h, &[Cr(b2), A(a2), A(a2)]));
    let vac = PureState::vacuum(register)?;
    let occ_amps = ordered_second_order(&h1, &h2, 1.0, &vac.amplitudes);
    let mut idx = vec![0usize; reg.modes()];
    idx[a1] = 2;
    idx[a2] = 1;
    let i21 = reg.index(&idx);
    idx[a1] = 1;
    idx[a2] = 2;
    let i12 = reg.index(&idx);
    let occupancy_fidelity = overlap_fidelity(&occ_amps, &[(i21, 1.0), (i12, 1.0)]);
    let occupancy = PureState { register: register.clone(), amplitudes: occ_amps };

    let cut = |l: &str, p| ModeSpec::new(l, Some(p), 1);
    let split_reg = ModeRegister::new(vec![
        cut("p1V", V),
        cut("p1H", H),
        cut("bV", V),
        cut("bH", H),
        cut("p2V", V),
        cut("p2H", H),
        cut("p3V", V),
        cut("p3H", H),
    ])?;
    let sreg = split_reg.fock()?;
    let (p1v, p1h, bv, bh, p2v, p2h, p3v, p3h) = (0, 1, 2, 3, 4, 5, 6, 7);
    let s1 = SparseMatrix::word(&sreg, g, &[Cr(p1v), Cr(bh)])
        .add(&SparseMatrix::word(&sreg, g, &[Cr(p1h), Cr(bv)]))
        .add(&SparseMatrix::word(&sreg, g.conj(), &[A(p1v), A(bh)]))
        .add(&SparseMatrix::word(&sreg, g.conj(), &[A(p1h), A(bv)]));
    let s2 = SparseMatrix::word(&sreg, I * c.k_v, &[Cr(p2v), Cr(p3v), A(bv)])
        .add(&SparseMatrix::word(&sreg, I * c.k_h, &[Cr(p2h), Cr(p3h), A(bh)]))
        .add(&SparseMatrix::word(&sreg, -I * c.k_v, &[Cr(bv), A(p2v), A(p3v)]))
        .add(&SparseMatrix::word(&sreg, -I * c.k_h, &[Cr(bh), A(p2h), A(p3h)]));
    let svac = PureState::vacuum(&split_reg)?;
    let split_amps = ordered_second_order(&s1, &s2, 1.0, &svac.amplitudes);
    let occ_of = |ones: &[usize]| {
        let mut o = vec![0usize; 8];
        for &k in ones {
            o[k] = 1;
        }
        sreg.index(&o)
    };
    let ivhh = occ_of(&[p1v, p2h, p3h]);
    let ihvv = occ_of(&[p1h, p2v, p3v]);
    let fidelity = overlap_fidelity(&split_amps, &[(ivhh, 1.0), (ihvv, 1.0)]);
    let triplet_weight = split_amps[ivhh].norm_sqr() + split_amps[ihvv].norm_sqr();
    Ok(GhzReport {
        amplitude_vhh: split_amps[ivhh],
        amplitude_hvv: split_amps[ihvv],
        occupancy,
        split: PureState { register: split_reg, amplitudes: split_amps },
        fidelity,
        occupancy_fidelity,
        triplet_weight,
    })
}

fn overlap_fidelity(psi: &[Complex64], target: &[(usize, f64)]) -> f64 {
    let n = norm_sqr(psi);
    if n == 0.0 {
        return 0.0;
    }
    let tn: f64 = target.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    let mut t = vec![ZERO; psi.len()];
    for &(i, w) in target {
        t[i] = Complex64::new(w / tn, 0.0);
    }
    inner(&t, psi).norm_sqr() / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reg() -> ModeRegister {
        ModeRegister::triplet(DEFAULT_CUTOFF).unwrap()
    }

    #[test]
    fn h1_on_vacuum() {
        let r = reg();
        let e0 = Complex64::new(0.3, 0.2);
        let (h1, h2) = build_triplet_hamiltonians(&r, 1.7, 0.9, e0).unwrap();
        let vac = PureState::vacuum(&r).unwrap();
        let v = h1.mul_vec(&vac.amplitudes);
        let fr = r.fock().unwrap();
        let target = fr.index(&[1, 1, 0, 0]);
        for (i, a) in v.iter().enumerate() {
            if i == target {
                assert_relative_eq!((a - I * 1.7 * e0).norm(), 0.0, epsilon = 1e-15);
            } else {
                assert_eq!(*a, ZERO);
            }
        }
        assert!(norm_sqr(&h2.mul_vec(&vac.amplitudes)) == 0.0);
        assert!(h1.hermiticity_residual() < 1e-12);
        assert!(h2.hermiticity_residual() < 1e-12);
    }

    #[test]
    fn triplet_amplitude() {
        let r = reg();
        let (zp, xp, t) = (2.0, 3.0, 0.1);
        let e0 = Complex64::new(0.5, -0.25);
        let s = triplet_state(&r, zp, xp, e0, t).unwrap();
        let a = s.amplitude(&[0, 1, 1, 1]).unwrap();
        assert_relative_eq!((a - e0 * (t * zp) * (t * xp)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn dyson_triplet_is_half_the_ordered_product() {
        let r = reg();
        let (h1, h2) = build_triplet_hamiltonians(&r, 1.3, 0.7, ONE).unwrap();
        let h = h1.add(&h2);
        let vac = PureState::vacuum(&r).unwrap().amplitudes;
        let t = 0.2;
        let full = dyson_second_order(&h, t, &vac);
        let ordered = ordered_second_order(&h1, &h2, t, &vac);
        let k = r.fock().unwrap().index(&[0, 1, 1, 1]);
        assert_relative_eq!(full[k].re, 0.5 * ordered[k].re, max_relative = 1e-14);
        // the reverse ordering annihilates vacuum
        let rev = ordered_second_order(&h2, &h1, t, &vac);
        assert_eq!(norm_sqr(&rev), 0.0);
    }

    #[test]
    fn zero_hamiltonian_gives_zero() {
        let vac = PureState::vacuum(&reg()).unwrap().amplitudes;
        let z = SparseMatrix::zeros(vac.len());
        assert_eq!(norm_sqr(&dyson_second_order(&z, 1.0, &vac)), 0.0);
    }

    #[test]
    fn ghz_equal_couplings() {
        let rep = ghz_state(&ModeRegister::ghz(3).unwrap(), GhzCouplings::equal(0.01, 0.02, ONE)).unwrap();
        assert!((rep.fidelity - 1.0).abs() < 1e-10);
        assert!((rep.occupancy_fidelity - 1.0).abs() < 1e-10);
        let expected = 0.01 * 0.02;
        assert_relative_eq!(rep.amplitude_vhh.norm(), expected, max_relative = 1e-12);
    }

    #[test]
    fn ghz_unequal_couplings() {
        let (kv, kh) = (1.0, 0.4);
        let rep = ghz_state(&ModeRegister::ghz(3).unwrap(), GhzCouplings { chi_bar: 0.1, k_v: kv, k_h: kh, e0: ONE }).unwrap();
        assert_relative_eq!(rep.fidelity, (kv + kh) * (kv + kh) / (2.0 * (kv * kv + kh * kh)), max_relative = 1e-12);
        assert!(rep.fidelity < 1.0);
    }

    #[test]
    fn ghz_without_second_process() {
        let rep = ghz_state(&ModeRegister::ghz(3).unwrap(), GhzCouplings::equal(0.1, 0.0, ONE)).unwrap();
        assert_eq!(rep.triplet_weight, 0.0);
        assert_eq!(rep.fidelity, 0.0);
    }

    #[test]
    fn ghz_needs_labels() {
        let mut r = ModeRegister::ghz(3).unwrap();
        r.modes[3].label = "c".into();
        assert!(matches!(ghz_state(&r, GhzCouplings::equal(0.1, 0.1, ONE)), Err(Error::Config { .. })));
        let mut r = ModeRegister::ghz(3).unwrap();
        r.modes[0].polarization = None;
        assert!(matches!(ghz_state(&r, GhzCouplings::equal(0.1, 0.1, ONE)), Err(Error::Config { .. })));
    }
}
