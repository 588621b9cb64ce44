use super::density::DensityOperator;
use super::model::QuantumModel;
use crate::fock::SparseMatrix;
use crate::ode::{Dopri, OdeOptions};
use crate::{Error, Result};
use num_complex::Complex64;

/// Largest joint dimension propagated as a dense matrix.
pub const DENSE_DIM_LIMIT: usize = 4096;

/// Above this dimension `Method::Auto` picks trajectories; the dense step
/// cost grows with the cube of the dimension.
pub const AUTO_DENSE_DIM: usize = 400;

/// `ρ̇ = Gρ + ρG† + Σ CρC†` with `G = −iH − ½ΣC†C`.
///
/// The input is assumed Hermitian and the output is Hermitian to the last
/// bit.
pub struct LindbladRhs<'a> {
    generator: &'a SparseMatrix,
    collapse: &'a [SparseMatrix],
    scratch: Vec<Complex64>,
    scratch2: Vec<Complex64>,
}

impl<'a> LindbladRhs<'a> {
    pub fn new(model: &'a QuantumModel) -> Self {
        let n = model.dim();
        LindbladRhs {
            generator: &model.generator,
            collapse: &model.collapse,
            scratch: vec![Complex64::new(0.0, 0.0); n * n],
            scratch2: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn eval(&mut self, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.generator.dim();
        self.generator.mul_dense(rho, &mut self.scratch);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.scratch[i * n + j] + self.scratch[j * n + i].conj();
            }
        }
        for c in self.collapse {
            c.mul_dense(rho, &mut self.scratch);
            // scratch2 = (Cρ)† = ρC†
            for i in 0..n {
                for j in 0..n {
                    self.scratch2[i * n + j] = self.scratch[j * n + i].conj();
                }
            }
            c.mul_dense(&self.scratch2, &mut self.scratch);
            // Hermitian part only, so rounding cannot seed an anti-Hermitian
            // component (that component is not damped by this map).
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] += 0.5 * (self.scratch[i * n + j] + self.scratch[j * n + i].conj());
                }
            }
        }
    }
}

pub fn check_dense_dim(dim: usize) -> Result<()> {
    if dim > DENSE_DIM_LIMIT {
        return Err(Error::ResourceGuard(format!(
            "dense propagation refused: dimension {dim} exceeds {DENSE_DIM_LIMIT}; use the trajectory ensemble instead"
        )));
    }
    Ok(())
}

/// Propagates `rho0` through every time in `times` (non-decreasing, starting
/// at or after `rho0.time`), calling `observer` at each.
pub fn lindblad_dense_propagate<O>(
    model: &QuantumModel,
    rho0: &DensityOperator,
    times: &[f64],
    opts: OdeOptions,
    mut observer: O,
) -> Result<DensityOperator>
where
    O: FnMut(&DensityOperator) -> Result<()>,
{
    let n = model.dim();
    check_dense_dim(n)?;
    if rho0.dim != n {
        return Err(Error::Domain(format!("initial state has dimension {}, model {}", rho0.dim, n)));
    }
    let mut rhs = LindbladRhs::new(model);
    let f = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        rhs.eval(y, dy);
        Ok(())
    };
    let mut solver = Dopri::new(f, n * n, opts);
    let mut t = rho0.time;
    let mut y = rho0.data.clone();
    for &tg in times {
        if tg < t {
            return Err(Error::config("times", "must be non-decreasing and start at or after the initial time"));
        }
        solver.integrate(&mut t, &mut y, tg)?;
        observer(&DensityOperator { dim: n, data: y.clone(), time: t })?;
    }
    Ok(DensityOperator { dim: n, data: y, time: t })
}

pub fn dense_options() -> OdeOptions {
    OdeOptions { rtol: 1e-9, atol: 1e-11, h0: 1e-4, ..Default::default() }
}
