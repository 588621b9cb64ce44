use crate::special::{dirichlet, sinc};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One slab of a layered crystal. `chi = 0` marks a linear spacer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub length: f64,
    pub chi: f64,
    pub material_id: String,
}

impl LayerSpec {
    pub fn validate(&self, path: &str) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::config(format!("{path}.length"), "must be finite and > 0"));
        }
        if !self.chi.is_finite() {
            return Err(Error::config(format!("{path}.chi"), "must be finite"));
        }
        Ok(())
    }
}

/// A layer with its mismatch already evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerTerm {
    pub length: f64,
    pub chi: f64,
    pub delta_k: f64,
}

/// Layered-medium coupling sum. The running phase `φ_m` is accumulated
/// with compensated summation so long lattices keep full precision.
pub fn coupling_sum(terms: &[LayerTerm]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let (mut phi, mut carry) = (0.0f64, 0.0f64);
    for t in terms {
        let half = 0.5 * t.delta_k * t.length;
        if t.chi != 0.0 {
            let phase = (phi + carry) + half;
            acc += Complex64::from_polar(t.length * t.chi * sinc(half), -phase);
        }
        let x = t.length * t.delta_k;
        let s = phi + x;
        if phi.abs() >= x.abs() {
            carry += (phi - s) + x;
        } else {
            carry += (x - s) + phi;
        }
        phi = s;
    }
    acc
}

/// Phase bookkeeping for the two-section closed forms.
///
/// `Exact` is the geometric-series result and equals the layer sum. `Printed`
/// drops the global factor `i^{count−1}` and the offset of the second
/// section, which leaves magnitudes unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    #[default]
    Exact,
    Printed,
}

/// Which sections of a two-section closed form to keep. `FirstOnly`
/// corresponds to neglecting the off-resonant section for ζ; `SecondOnly`
/// does the same for ξ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionMode {
    #[default]
    Both,
    FirstOnly,
    SecondOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionPair {
    pub first: Complex64,
    pub second: Complex64,
}

impl SectionPair {
    pub fn total(&self) -> Complex64 {
        self.first + self.second
    }

    pub fn select(&self, mode: SectionMode) -> Complex64 {
        match mode {
            SectionMode::Both => self.total(),
            SectionMode::FirstOnly => self.first,
            SectionMode::SecondOnly => self.second,
        }
    }
}

/// Two periodically poled sections: `m` domains of length `l1` followed by
/// `n` domains of length `l2`. Each section starts with `+χ` and alternates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualGrid {
    pub m: usize,
    pub l1: f64,
    pub n: usize,
    pub l2: f64,
    pub chi1: f64,
    pub chi2: f64,
}

impl DualGrid {
    pub fn new(m: usize, l1: f64, n: usize, l2: f64, chi: f64) -> Self {
        DualGrid { m, l1, n, l2, chi1: chi, chi2: chi }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        if self.m == 0 {
            return Err(Error::config(format!("{path}.m"), "first section needs at least one domain"));
        }
        for (name, v) in [("l1", self.l1), ("l2", self.l2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{path}.{name}"), "must be finite and > 0"));
            }
        }
        if !(self.chi1.is_finite() && self.chi2.is_finite()) {
            return Err(Error::config(path, "chi values must be finite"));
        }
        Ok(())
    }

    pub fn q1(&self) -> f64 {
        PI / self.l1
    }
    pub fn q2(&self) -> f64 {
        PI / self.l2
    }
    pub fn section1_length(&self) -> f64 {
        self.m as f64 * self.l1
    }
    pub fn section2_length(&self) -> f64 {
        self.n as f64 * self.l2
    }

    pub fn layers(&self, material1: &str, material2: &str) -> Vec<LayerSpec> {
        let mut out = Vec::with_capacity(self.m + self.n);
        for (count, l, chi, mat) in [(self.m, self.l1, self.chi1, material1), (self.n, self.l2, self.chi2, material2)] {
            out.extend((0..count).map(|j| LayerSpec {
                length: l,
                chi: if j % 2 == 0 { chi } else { -chi },
                material_id: mat.to_string(),
            }));
        }
        out
    }

    /// Explicit layer list with one mismatch for every layer.
    pub fn expand(&self, delta_k: f64) -> Vec<LayerTerm> {
        self.layers("", "")
            .into_iter()
            .map(|l| LayerTerm { length: l.length, chi: l.chi, delta_k })
            .collect()
    }

    fn sections(&self, dk: f64, conv: PhaseConvention) -> SectionPair {
        SectionPair {
            first: poled_section(self.m, self.l1, self.chi1, 0.0, dk, conv),
            second: poled_section(self.n, self.l2, self.chi2, self.section1_length(), dk, conv),
        }
    }
}

/// Closed form of `count` alternating domains starting at `z0`.
fn poled_section(count: usize, l: f64, chi: f64, z0: f64, dk: f64, conv: PhaseConvention) -> Complex64 {
    if count == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let q = PI / l;
    let len = count as f64 * l;
    let mag = l * chi * sinc(0.5 * l * dk) * dirichlet(count, 0.5 * l * (dk - q));
    let phase = match conv {
        PhaseConvention::Exact => -(z0 + 0.5 * len) * dk + 0.5 * (count as f64 - 1.0) * PI,
        PhaseConvention::Printed => -0.5 * len * dk,
    };
    Complex64::from_polar(mag, phase)
}

/// ζ of a dual-grid crystal at mismatch `Δk₁`, section by section.
pub fn zeta_dualgrid(grid: &DualGrid, delta_k1: f64, conv: PhaseConvention) -> SectionPair {
    grid.sections(delta_k1, conv)
}

/// ξ of a dual-grid crystal at mismatch `Δk₂`.
pub fn xi_dualgrid(grid: &DualGrid, delta_k2: f64, conv: PhaseConvention) -> SectionPair {
    grid.sections(delta_k2, conv)
}

/// Large-`M` form `(2/π) M l₁ χ e^{−iL₁Δk₁/2} sinc(L₁(Δk₁−q₁)/2)`.
pub fn zeta_sinc_approx(grid: &DualGrid, delta_k1: f64) -> Complex64 {
    let big_l = grid.section1_length();
    let mag = 2.0 / PI * big_l * grid.chi1 * sinc(0.5 * big_l * (delta_k1 - grid.q1()));
    Complex64::from_polar(mag, -0.5 * big_l * delta_k1)
}

/// First section periodically poled, second section `n` layers alternating
/// nonlinear slabs (`l2`, constant `χ₂`) and linear spacers (`l3`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacerGrid {
    pub m: usize,
    pub l1: f64,
    pub n: usize,
    pub l2: f64,
    pub l3: f64,
    pub chi1: f64,
    pub chi2: f64,
}

impl SpacerGrid {
    pub fn validate(&self, path: &str) -> Result<()> {
        if self.n == 0 || self.n % 2 != 0 {
            return Err(Error::config(format!("{path}.n"), "must be even and > 0"));
        }
        for (name, v) in [("l1", self.l1), ("l2", self.l2), ("l3", self.l3)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{path}.{name}"), "must be finite and > 0"));
            }
        }
        if !(self.chi1.is_finite() && self.chi2.is_finite()) {
            return Err(Error::config(path, "chi values must be finite"));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        self.l2 + self.l3
    }

    pub fn section2_length(&self) -> f64 {
        0.5 * self.n as f64 * self.period()
    }

    /// `ΔK = (l₂Δk₂ + l₃Δκ₂)/(l₂+l₃)`.
    pub fn delta_big_k(&self, delta_k2: f64, delta_kappa2: f64) -> f64 {
        (self.l2 * delta_k2 + self.l3 * delta_kappa2) / self.period()
    }

    pub fn layers(&self, material1: &str, material2: &str, spacer: &str) -> Vec<LayerSpec> {
        let mut out: Vec<LayerSpec> = (0..self.m)
            .map(|j| LayerSpec {
                length: self.l1,
                chi: if j % 2 == 0 { self.chi1 } else { -self.chi1 },
                material_id: material1.to_string(),
            })
            .collect();
        for _ in 0..self.n / 2 {
            out.push(LayerSpec { length: self.l2, chi: self.chi2, material_id: material2.to_string() });
            out.push(LayerSpec { length: self.l3, chi: 0.0, material_id: spacer.to_string() });
        }
        out
    }

    /// Second section only, starting at `z = 0`.
    pub fn section2_terms(&self, delta_k2: f64, delta_kappa2: f64) -> Vec<LayerTerm> {
        (0..self.n)
            .map(|j| {
                if j % 2 == 0 {
                    LayerTerm { length: self.l2, chi: self.chi2, delta_k: delta_k2 }
                } else {
                    LayerTerm { length: self.l3, chi: 0.0, delta_k: delta_kappa2 }
                }
            })
            .collect()
    }
}

/// ξ of the spacer section, referenced to its own entrance face.
///
/// With `ΔK → 0` the kernel tends to `n/2`, the number of nonlinear slabs.
/// `Printed` evaluates the quarter-period kernel `sin(n d ΔK/4)/sin(d ΔK/4)`
/// and its phase `l₂Δk₂/2 + ΔK d (n−1)/2` verbatim; it peaks at `n` and does
/// not equal the layer sum.
pub fn xi_linear_spacers(grid: &SpacerGrid, delta_k2: f64, delta_kappa2: f64, conv: PhaseConvention) -> Complex64 {
    let d = grid.period();
    let big_k = grid.delta_big_k(delta_k2, delta_kappa2);
    let nf = grid.n as f64;
    let base = grid.l2 * grid.chi2 * sinc(0.5 * grid.l2 * delta_k2);
    let (kernel, phi) = match conv {
        PhaseConvention::Exact => {
            let half = grid.n / 2;
            (
                dirichlet(half, 0.5 * d * big_k),
                0.5 * grid.l2 * delta_k2 + 0.5 * (half as f64 - 1.0) * d * big_k,
            )
        }
        PhaseConvention::Printed => (
            dirichlet(grid.n, 0.25 * d * big_k),
            0.5 * grid.l2 * delta_k2 + big_k * d * 0.5 * (nf - 1.0),
        ),
    };
    Complex64::from_polar(base * kernel, -phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / a.norm().max(b.norm())
    }

    #[test]
    fn single_layer() {
        let (l, chi, dk) = (2.0e-6, 3.0, 4.0e5);
        let v = coupling_sum(&[LayerTerm { length: l, chi, delta_k: dk }]);
        let want = Complex64::from_polar(l * chi * sinc(dk * l / 2.0), -dk * l / 2.0);
        assert!(rel(v, want) < 1e-15);
    }

    #[test]
    fn opposite_domains_cancel_at_full_period() {
        let l = 1.0e-6;
        let dk = 2.0 * PI / l;
        let v = coupling_sum(&[
            LayerTerm { length: l, chi: 1.0, delta_k: dk },
            LayerTerm { length: l, chi: -1.0, delta_k: dk },
        ]);
        assert!(v.norm() < 1e-20);
    }

    #[test]
    fn zero_mismatch_sums_chi_lengths() {
        let terms = [
            LayerTerm { length: 1.0, chi: 2.0, delta_k: 0.0 },
            LayerTerm { length: 0.5, chi: -1.0, delta_k: 0.0 },
            LayerTerm { length: 3.0, chi: 0.0, delta_k: 0.0 },
        ];
        let v = coupling_sum(&terms);
        assert_eq!(v, Complex64::new(1.5, 0.0));
    }

    #[test]
    fn dualgrid_matches_layer_sum() {
        let g = DualGrid { m: 37, l1: 3.1e-6, n: 24, l2: 4.7e-6, chi1: 1.3, chi2: -0.4 };
        for &dk in &[g.q1(), g.q2(), 0.93 * g.q1(), 1.21 * g.q2(), 0.0] {
            let closed = zeta_dualgrid(&g, dk, PhaseConvention::Exact).total();
            assert!(rel(closed, coupling_sum(&g.expand(dk))) < 1e-12, "dk = {dk}");
        }
    }

    #[test]
    fn resonance_limit_and_first_zero() {
        let g = DualGrid::new(40, 2.0e-6, 30, 3.0e-6, 1.0);
        let q1 = g.q1();
        let at = zeta_dualgrid(&g, q1, PhaseConvention::Printed).first;
        let want = Complex64::from_polar(g.l1 * sinc(g.l1 * q1 / 2.0) * 40.0, -g.section1_length() * q1 / 2.0);
        assert!(rel(at, want) < 1e-14);
        let z = zeta_dualgrid(&g, q1 + 2.0 * PI / (40.0 * g.l1), PhaseConvention::Exact).first;
        assert!(z.norm() < 1e-12 * g.section1_length());
    }

    #[test]
    fn printed_and_exact_share_magnitudes() {
        let g = DualGrid::new(15, 1.0, 9, 1.7, 1.0);
        for &dk in &[0.3, 2.9, 3.3] {
            let a = zeta_dualgrid(&g, dk, PhaseConvention::Exact);
            let b = zeta_dualgrid(&g, dk, PhaseConvention::Printed);
            assert_relative_eq!(a.first.norm(), b.first.norm(), max_relative = 1e-14);
            assert_relative_eq!(a.second.norm(), b.second.norm(), max_relative = 1e-14);
        }
    }

    #[test]
    fn sinc_approx_at_resonance() {
        let g = DualGrid::new(200, 1.0e-6, 0, 1.0e-6, 2.0);
        let v = zeta_sinc_approx(&g, g.q1());
        assert_relative_eq!(v.norm(), 2.0 / PI * 200.0 * 1.0e-6 * 2.0, max_relative = 1e-14);
        assert!(zeta_sinc_approx(&g, g.q1() + 2.0 * PI / g.section1_length()).norm() < 1e-12 * v.norm());
    }

    #[test]
    fn xi_second_section_dominates_at_q2() {
        let g = DualGrid::new(100, 1.0e-6, 100, 1.7e-6, 1.0);
        let xi = xi_dualgrid(&g, g.q2(), PhaseConvention::Exact);
        assert!(xi.second.norm() > 20.0 * xi.first.norm());
        let g0 = DualGrid { n: 0, ..g.clone() };
        let xi0 = xi_dualgrid(&g0, g.q2(), PhaseConvention::Exact);
        assert_eq!(xi0.second, Complex64::new(0.0, 0.0));
        assert_eq!(xi0.total(), xi0.first);
    }

    fn spacer() -> SpacerGrid {
        SpacerGrid { m: 10, l1: 1.0e-6, n: 16, l2: 2.0e-6, l3: 1.5e-6, chi1: 1.0, chi2: 0.8 }
    }

    #[test]
    fn spacer_matches_layer_sum() {
        let g = spacer();
        for &(dk2, dkap) in &[(-1.2e6, 2.1e6), (3.0e5, 7.0e5), (-PI / g.l2, PI / g.l3)] {
            let closed = xi_linear_spacers(&g, dk2, dkap, PhaseConvention::Exact);
            assert!(rel(closed, coupling_sum(&g.section2_terms(dk2, dkap))) < 1e-12);
        }
    }

    #[test]
    fn spacer_perfect_qpm_magnitude() {
        let g = spacer();
        let dk2 = -PI / g.l2;
        let dkap = -g.l2 * dk2 / g.l3;
        assert!(g.delta_big_k(dk2, dkap).abs() < 1e-6);
        let v = xi_linear_spacers(&g, dk2, dkap, PhaseConvention::Exact);
        assert_relative_eq!(v.norm(), 8.0 * g.l2 * 0.8 * sinc(g.l2 * dk2 / 2.0).abs(), max_relative = 1e-12);
        let printed = xi_linear_spacers(&g, dk2, dkap, PhaseConvention::Printed);
        assert_relative_eq!(printed.norm(), 2.0 * v.norm(), max_relative = 1e-12);
    }

    #[test]
    fn vanishing_spacer_is_uniform_slab() {
        let mut g = spacer();
        g.l3 = 1e-18;
        let dk2 = 4.0e5;
        let v = xi_linear_spacers(&g, dk2, 1.0e6, PhaseConvention::Exact);
        let slab = coupling_sum(&[LayerTerm { length: 8.0 * g.l2, chi: g.chi2, delta_k: dk2 }]);
        assert!(rel(v, slab) < 1e-8);
    }
}
