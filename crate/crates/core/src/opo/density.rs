use crate::fock::SparseMatrix;
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense row-major density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    pub dim: usize,
    pub data: Vec<Complex64>,
    pub time: f64,
}

impl DensityOperator {
    pub fn zeros(dim: usize) -> Self {
        DensityOperator { dim, data: vec![ZERO; dim * dim], time: 0.0 }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut r = Self::zeros(dim);
        r.data[index * dim + index] = Complex64::new(1.0, 0.0);
        r
    }

    pub fn from_pure(psi: &[Complex64]) -> Self {
        let mut r = Self::zeros(psi.len());
        r.add_pure(psi, 1.0);
        r
    }

    /// `ρ += w |ψ⟩⟨ψ|`.
    pub fn add_pure(&mut self, psi: &[Complex64], w: f64) {
        let n = self.dim;
        for i in 0..n {
            let a = psi[i] * w;
            if a == ZERO {
                continue;
            }
            let row = &mut self.data[i * n..(i + 1) * n];
            for (r, b) in row.iter_mut().zip(psi) {
                *r += a * b.conj();
            }
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim;
        let mut m = 0.0f64;
        for i in 0..n {
            for j in i..n {
                m = m.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        m
    }

    fn hermitian_part(&self) -> DMatrix<Complex64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |i, j| 0.5 * (self.get(i, j) + self.get(j, i).conj()))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.hermitian_part().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `Tr(Aρ)`.
    pub fn expectation(&self, a: &SparseMatrix) -> Complex64 {
        a.triplets().map(|(r, c, v)| v * self.get(c, r)).sum()
    }

    /// `½ Σ |λ(ρ − σ)|`.
    pub fn trace_distance(&self, other: &DensityOperator) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::Domain(format!("dimension mismatch {} vs {}", self.dim, other.dim)));
        }
        let n = self.dim;
        let m = DMatrix::from_fn(n, n, |i, j| {
            let d = self.get(i, j) - other.get(i, j);
            let dt = self.get(j, i) - other.get(j, i);
            0.5 * (d + dt.conj())
        });
        Ok(0.5 * m.symmetric_eigenvalues().iter().map(|l| l.abs()).sum::<f64>())
    }

    /// Invariant report: `(|Tr ρ − 1|, Hermiticity residual, min eigenvalue)`.
    pub fn validity(&self) -> (f64, f64, f64) {
        ((self.trace() - 1.0).norm(), self.hermiticity_residual(), self.min_eigenvalue())
    }
}
