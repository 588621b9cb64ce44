use super::walkoff::GaussianForm;
use crate::qpm::Polarization;
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Points per axis of a default grid.
pub const DEFAULT_GRID_POINTS: usize = 64;
/// Half-width of a default axis in standard deviations.
pub const DEFAULT_GRID_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Full,
    Resonant,
    Gaussian,
}

/// Amplitude sampled on a product grid of detunings; `values[(i·n₂ + j)·n₃ + k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointAmplitudeGrid {
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
    pub nu3: Vec<f64>,
    pub values: Vec<Complex64>,
    pub polarizations: [Polarization; 3],
    pub route: Route,
}

impl JointAmplitudeGrid {
    /// Evaluates `f` at every grid point, in parallel over `ν₁`.
    pub fn build<F>(axes: [Vec<f64>; 3], polarizations: [Polarization; 3], route: Route, f: F) -> Result<Self>
    where
        F: Fn(f64, f64, f64) -> Result<Complex64> + Sync,
    {
        let [nu1, nu2, nu3] = axes;
        if nu1.is_empty() || nu2.is_empty() || nu3.is_empty() {
            return Err(Error::config("grid", "every axis needs at least one point"));
        }
        let slabs: Vec<Result<Vec<Complex64>>> = nu1
            .par_iter()
            .map(|&a| {
                let mut slab = Vec::with_capacity(nu2.len() * nu3.len());
                for &b in &nu2 {
                    for &c in &nu3 {
                        slab.push(f(a, b, c)?);
                    }
                }
                Ok(slab)
            })
            .collect();
        let mut values = Vec::with_capacity(nu1.len() * nu2.len() * nu3.len());
        for s in slabs {
            values.extend(s?);
        }
        Ok(JointAmplitudeGrid { nu1, nu2, nu3, values, polarizations, route })
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.nu1.len(), self.nu2.len(), self.nu3.len()]
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        let [_, n2, n3] = self.shape();
        self.values[(i * n2 + j) * n3 + k]
    }

    pub fn check(&self) -> Result<()> {
        let [a, b, c] = self.shape();
        if self.values.len() != a * b * c {
            return Err(Error::Domain(format!("{} values for a {a}×{b}×{c} grid", self.values.len())));
        }
        if self.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("grid contains non-finite amplitudes".into()));
        }
        Ok(())
    }
}

/// Evenly spaced axes over `±sigmas` standard deviations of each
/// single-photon factor `exp(−aₖνₖ²)`, i.e. `σₖ = 1/√(2aₖ)`.
pub fn default_axes(form: &GaussianForm, points: usize, sigmas: f64) -> Result<[Vec<f64>; 3]> {
    if points < 2 {
        return Err(Error::config("grid.points", "must be at least 2"));
    }
    let mut out: [Vec<f64>; 3] = Default::default();
    for (k, axis) in out.iter_mut().enumerate() {
        let a = form.a[k];
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("axis {} has non-positive width coefficient {a}", k + 1)));
        }
        let half = sigmas / (2.0 * a).sqrt();
        *axis = (0..points).map(|i| -half + 2.0 * half * i as f64 / (points - 1) as f64).collect();
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bipartition {
    /// Photon 1 against photons 2 and 3.
    #[serde(rename = "1|23")]
    One,
    #[serde(rename = "2|13")]
    Two,
    #[serde(rename = "3|12")]
    Three,
}

impl std::str::FromStr for Bipartition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1|23" | "1" => Ok(Bipartition::One),
            "2|13" | "2" => Ok(Bipartition::Two),
            "3|12" | "3" => Ok(Bipartition::Three),
            _ => Err(Error::config("bipartition", format!("expected 1|23, 2|13 or 3|12, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtReport {
    pub schmidt_number: f64,
    pub purity: f64,
    /// Normalized so that `Σσ² = 1`, descending.
    pub singular_values: Vec<f64>,
}

/// Unfolds the grid over the bipartition and diagonalizes the smaller Gram
/// matrix `AA†`, whose eigenvalues are `σₖ²`.
pub fn schmidt_analysis(grid: &JointAmplitudeGrid, part: Bipartition) -> Result<SchmidtReport> {
    grid.check()?;
    let [n1, n2, n3] = grid.shape();
    let norm2: f64 = grid.values.iter().map(|v| v.norm_sqr()).sum();
    if norm2 == 0.0 {
        return Err(Error::Domain("amplitude grid is identically zero".into()));
    }
    let (rows, cols) = match part {
        Bipartition::One => (n1, n2 * n3),
        Bipartition::Two => (n2, n1 * n3),
        Bipartition::Three => (n3, n1 * n2),
    };
    let scale = 1.0 / norm2.sqrt();
    let a = DMatrix::<Complex64>::from_fn(rows, cols, |r, c| {
        let (i, j, k) = match part {
            Bipartition::One => (r, c / n3, c % n3),
            Bipartition::Two => (c / n3, r, c % n3),
            Bipartition::Three => (c / n2, c % n2, r),
        };
        grid.get(i, j, k) * scale
    });
    let gram = if rows <= cols { &a * a.adjoint() } else { a.adjoint() * &a };
    let mut lambda: Vec<f64> = gram.symmetric_eigenvalues().iter().map(|l| l.max(0.0)).collect();
    lambda.sort_by(|x, y| y.total_cmp(x));
    let total: f64 = lambda.iter().sum();
    let purity: f64 = lambda.iter().map(|l| (l / total) * (l / total)).sum();
    Ok(SchmidtReport {
        schmidt_number: 1.0 / purity,
        purity,
        singular_values: lambda.iter().map(|l| (l / total).sqrt()).collect(),
    })
}
