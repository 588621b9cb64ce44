use super::params::OpoParams;
use crate::fock::{Ladder, Register, SparseMatrix};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Largest joint dimension accepted for state-vector work.
pub const TRAJECTORY_DIM_LIMIT: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// Pump, ω₁ and ω₂ modes with the drive acting on the pump.
    ThreeMode,
    /// Three-mode model written for the pump fluctuation `δa₀ = a₀ − E/γ₀`.
    /// The drive cancels against the pump damping, so `δa₀` stays close to
    /// vacuum and a small pump cutoff suffices. Signal and idler statistics
    /// are identical to [`ModelKind::ThreeMode`].
    ThreeModeDisplaced,
    /// Pump replaced by its stationary amplitude `E/γ₀`, giving the two-mode
    /// coupling `g = ζ′E/γ₀`. With `depletion`, the collapse operator
    /// `√(2κ) a₁a₂`, `κ = ζ′²/γ₀`, accounts for pump back-action.
    PumpEliminated {
        #[serde(default)]
        depletion: bool,
    },
}

/// Largest photon number kept per mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub n0_max: usize,
    pub n1_max: usize,
    pub n2_max: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { n0_max: 6, n1_max: 18, n2_max: 10 }
    }
}

impl Truncation {
    pub fn new(n0_max: usize, n1_max: usize, n2_max: usize) -> Self {
        Truncation { n0_max, n1_max, n2_max }
    }

    /// Cutoffs enlarged by a quarter (at least one level each).
    pub fn escalated(&self) -> Self {
        let up = |n: usize| n + (n / 4).max(1);
        Truncation { n0_max: up(self.n0_max), n1_max: up(self.n1_max), n2_max: up(self.n2_max) }
    }
}

#[derive(Debug, Clone)]
pub struct QuantumModel {
    pub kind: ModelKind,
    pub params: OpoParams,
    pub trunc: Truncation,
    pub register: Register,
    pub pump: Option<usize>,
    pub signal: usize,
    pub idler: usize,
    pub h: SparseMatrix,
    pub collapse: Vec<SparseMatrix>,
    /// `−iH − ½ Σ C†C`.
    pub generator: SparseMatrix,
}

impl QuantumModel {
    pub fn dim(&self) -> usize {
        self.register.dim()
    }

    /// Weights of `3n₀ + n₁ + 2n₂` in register order.
    pub fn charge_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.register.modes()];
        if let Some(p) = self.pump {
            w[p] = 3.0;
        }
        w[self.signal] = 1.0;
        w[self.idler] = 2.0;
        w
    }

    /// Levels of every mode, in register order.
    pub fn levels(&self) -> &[usize] {
        self.register.levels()
    }

    /// Index of the vacuum basis state.
    pub fn vacuum_index(&self) -> usize {
        0
    }
}

/// `H = i(E a₀† − E* a₀) + iζ′(a₀ a₁†a₂† − a₀† a₁a₂) + iξ′(a₁†²a₂ − a₁²a₂†)`
/// with damping `√(2γᵢ) aᵢ`.
pub fn build_model(params: &OpoParams, kind: ModelKind, trunc: Truncation) -> Result<QuantumModel> {
    params.validate()?;
    use Ladder::{Annihilate as A, Create as C};
    let i = Complex64::new(0.0, 1.0);
    let (levels, pump, s, d) = match kind {
        ModelKind::ThreeMode | ModelKind::ThreeModeDisplaced => (vec![trunc.n0_max + 1, trunc.n1_max + 1, trunc.n2_max + 1], Some(0), 1, 2),
        ModelKind::PumpEliminated { .. } => (vec![trunc.n1_max + 1, trunc.n2_max + 1], None, 0, 1),
    };
    let dim: usize = levels.iter().product();
    if dim > TRAJECTORY_DIM_LIMIT {
        return Err(Error::ResourceGuard(format!(
            "joint dimension {dim} exceeds the state-vector limit {TRAJECTORY_DIM_LIMIT}"
        )));
    }
    let reg = Register::new(&levels)?;
    let xi = params.xi_p;
    let mut h = SparseMatrix::word(&reg, i * xi, &[C(s), C(s), A(d)])
        .add(&SparseMatrix::word(&reg, -i * xi, &[A(s), A(s), C(d)]));
    let mut depletion_op = None;
    let mut rates = vec![(s, params.gamma1), (d, params.gamma2)];
    match (kind, pump) {
        (ModelKind::ThreeMode, Some(p)) => {
            let e = params.drive();
            let z = params.zeta_p;
            h = h
                .add(&SparseMatrix::word(&reg, i * e, &[C(p)]))
                .add(&SparseMatrix::word(&reg, -i * e.conj(), &[A(p)]))
                .add(&SparseMatrix::word(&reg, i * z, &[A(p), C(s), C(d)]))
                .add(&SparseMatrix::word(&reg, -i * z, &[C(p), A(s), A(d)]));
            rates.insert(0, (p, params.gamma0));
        }
        (ModelKind::ThreeModeDisplaced, Some(p)) => {
            if params.gamma0 <= 0.0 {
                return Err(Error::config("params.gamma0", "a displaced pump needs γ₀ > 0"));
            }
            let z = params.zeta_p;
            let g = params.drive() * (z / params.gamma0);
            h = h
                .add(&SparseMatrix::word(&reg, i * g, &[C(s), C(d)]))
                .add(&SparseMatrix::word(&reg, -i * g.conj(), &[A(s), A(d)]))
                .add(&SparseMatrix::word(&reg, i * z, &[A(p), C(s), C(d)]))
                .add(&SparseMatrix::word(&reg, -i * z, &[C(p), A(s), A(d)]));
            rates.insert(0, (p, params.gamma0));
        }
        (ModelKind::PumpEliminated { depletion }, _) => {
            if params.gamma0 <= 0.0 {
                return Err(Error::config("params.gamma0", "pump elimination needs γ₀ > 0"));
            }
            let g = params.drive() * (params.zeta_p / params.gamma0);
            h = h
                .add(&SparseMatrix::word(&reg, i * g, &[C(s), C(d)]))
                .add(&SparseMatrix::word(&reg, -i * g.conj(), &[A(s), A(d)]));
            let kappa = params.zeta_p * params.zeta_p / params.gamma0;
            if depletion && kappa > 0.0 {
                depletion_op = Some(SparseMatrix::word(&reg, Complex64::new((2.0 * kappa).sqrt(), 0.0), &[A(s), A(d)]));
            }
        }
        _ => unreachable!(),
    }
    let mut collapse: Vec<SparseMatrix> = rates
        .into_iter()
        .filter(|&(_, g)| g > 0.0)
        .map(|(m, g)| SparseMatrix::annihilation(&reg, m).scale(Complex64::new((2.0 * g).sqrt(), 0.0)))
        .collect();
    collapse.extend(depletion_op);
    let mut generator = h.scale(-i);
    for c in &collapse {
        generator = generator.add(&c.adjoint().matmul(c).scale(Complex64::new(-0.5, 0.0)));
    }
    Ok(QuantumModel { kind, params: *params, trunc, register: reg, pump, signal: s, idler: d, h, collapse, generator })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> OpoParams {
        OpoParams { e: 1.3, phi: 0.4, zeta_p: 0.2, xi_p: 0.1, gamma0: 1.0, gamma1: 1.0, gamma2: 0.5 }
    }

    #[test]
    fn hermitian_hamiltonians() {
        for kind in [ModelKind::ThreeMode, ModelKind::ThreeModeDisplaced, ModelKind::PumpEliminated { depletion: true }] {
            let m = build_model(&p(), kind, Truncation::new(3, 5, 4)).unwrap();
            assert!(m.h.hermiticity_residual() < 1e-12);
        }
    }

    #[test]
    fn words_conserve_charge_without_drive() {
        let mut q = p();
        q.e = 0.0;
        let m = build_model(&q, ModelKind::ThreeMode, Truncation::new(3, 6, 4)).unwrap();
        let charge = m.register.weighted_number(&m.charge_weights());
        for (r, c, _) in m.h.triplets() {
            assert_eq!(charge[r], charge[c]);
        }
    }

    #[test]
    fn collapse_count() {
        let mut q = p();
        q.gamma2 = 0.0;
        let m = build_model(&q, ModelKind::ThreeMode, Truncation::new(2, 2, 2)).unwrap();
        assert_eq!(m.collapse.len(), 2);
        let m = build_model(&q, ModelKind::PumpEliminated { depletion: true }, Truncation::new(2, 2, 2)).unwrap();
        assert_eq!(m.collapse.len(), 2);
    }
}
