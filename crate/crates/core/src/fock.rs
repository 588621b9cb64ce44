//! Truncated Fock spaces, ladder-operator words and a small CSR matrix type.
//!
//! Basis states are indexed row-major over the mode list: the first mode is
//! the most significant digit.

use crate::{Error, Result};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    levels: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl Register {
    /// `levels[k]` is the number of Fock levels kept for mode k (cutoff + 1).
    pub fn new(levels: &[usize]) -> Result<Self> {
        if levels.is_empty() || levels.iter().any(|&l| l < 1) {
            return Err(Error::config("truncation", "every mode needs at least one level"));
        }
        let mut strides = vec![1; levels.len()];
        for k in (0..levels.len() - 1).rev() {
            strides[k] = strides[k + 1] * levels[k + 1];
        }
        let dim = levels
            .iter()
            .try_fold(1usize, |acc, &l| acc.checked_mul(l))
            .ok_or_else(|| Error::ResourceGuard("register dimension overflows".into()))?;
        Ok(Register { levels: levels.to_vec(), strides, dim })
    }

    pub fn from_cutoffs(cutoffs: &[usize]) -> Result<Self> {
        Register::new(&cutoffs.iter().map(|c| c + 1).collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn modes(&self) -> usize {
        self.levels.len()
    }
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn index(&self, occ: &[usize]) -> usize {
        occ.iter().zip(&self.strides).map(|(n, s)| n * s).sum()
    }

    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % self.levels[mode]
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.modes()).map(|m| self.occupation(index, m)).collect()
    }

    /// Diagonal of `Σ_k w_k n_k`.
    pub fn weighted_number(&self, weights: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| weights.iter().enumerate().map(|(m, w)| w * self.occupation(i, m) as f64).sum())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<Complex64>,
}

impl SparseMatrix {
    pub fn zeros(n: usize) -> Self {
        SparseMatrix { n, row_ptr: vec![0; n + 1], col: Vec::new(), val: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect())
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_triplets(d.len(), d.iter().enumerate().map(|(i, &v)| (i, i, Complex64::new(v, 0.0))).collect())
    }

    /// Duplicates are summed and exact zeros dropped.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, Complex64)>) -> Self {
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut col = Vec::with_capacity(t.len());
        let mut val: Vec<Complex64> = Vec::with_capacity(t.len());
        let mut rows = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            if let (Some(&lr), Some(&lc)) = (rows.last(), col.last()) {
                if lr == r && lc == c {
                    *val.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            col.push(c);
            val.push(v);
        }
        let keep: Vec<bool> = val.iter().map(|v| *v != ZERO).collect();
        let mut k = 0;
        let (mut c2, mut v2) = (Vec::new(), Vec::new());
        for (i, &r) in rows.iter().enumerate() {
            if keep[i] {
                row_ptr[r + 1] += 1;
                c2.push(col[i]);
                v2.push(val[i]);
                k += 1;
            }
        }
        debug_assert_eq!(k, c2.len());
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix { n, row_ptr, col: c2, val: v2 }
    }

    /// Matrix of `coeff · op_1 op_2 … op_k` on the register (rightmost acts first).
    pub fn word(reg: &Register, coeff: Complex64, ops: &[Ladder]) -> Self {
        let mut t = Vec::new();
        let mut occ = vec![0usize; reg.modes()];
        'basis: for j in 0..reg.dim() {
            for (m, o) in occ.iter_mut().enumerate() {
                *o = reg.occupation(j, m);
            }
            let mut amp = 1.0f64;
            for op in ops.iter().rev() {
                match *op {
                    Ladder::Annihilate(m) => {
                        if occ[m] == 0 {
                            continue 'basis;
                        }
                        amp *= (occ[m] as f64).sqrt();
                        occ[m] -= 1;
                    }
                    Ladder::Create(m) => {
                        if occ[m] + 1 >= reg.levels[m] {
                            continue 'basis;
                        }
                        occ[m] += 1;
                        amp *= (occ[m] as f64).sqrt();
                    }
                }
            }
            t.push((reg.index(&occ), j, coeff * amp));
        }
        Self::from_triplets(reg.dim(), t)
    }

    pub fn annihilation(reg: &Register, mode: usize) -> Self {
        Self::word(reg, Complex64::new(1.0, 0.0), &[Ladder::Annihilate(mode)])
    }

    pub fn number(reg: &Register, mode: usize) -> Self {
        Self::diagonal(&(0..reg.dim()).map(|i| reg.occupation(i, mode) as f64).collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n).flat_map(move |r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col[k], self.val[k])))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_triplets(self.n, self.triplets().map(|(r, cc, v)| (r, cc, v * c)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self::from_triplets(self.n, self.triplets().chain(other.triplets()).collect())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.n, self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut t = Vec::new();
        for (r, k, a) in self.triplets() {
            for idx in other.row_ptr[k]..other.row_ptr[k + 1] {
                t.push((r, other.col[idx], a * other.val[idx]));
            }
        }
        Self::from_triplets(self.n, t)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for r in 0..self.n {
            let mut s = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.val[k] * x[self.col[k]];
            }
            y[r] = s;
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; self.n];
        self.apply(x, &mut y);
        y
    }

    /// `out = A ρ` for a dense row-major `n × n` matrix ρ.
    pub fn mul_dense(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        out.iter_mut().for_each(|v| *v = ZERO);
        for r in 0..n {
            let dst = &mut out[r * n..(r + 1) * n];
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let a = self.val[k];
                let src = &rho[self.col[k] * n..(self.col[k] + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
    }

    /// `⟨x|A|x⟩`.
    pub fn expectation(&self, x: &[Complex64]) -> Complex64 {
        let mut s = ZERO;
        for r in 0..self.n {
            let mut row = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                row += self.val[k] * x[self.col[k]];
            }
            s += x[r].conj() * row;
        }
        s
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut d = vec![ZERO; self.n * self.n];
        for (r, c, v) in self.triplets() {
            d[r * self.n + c] = v;
        }
        d
    }

    /// `max |A_ij − conj(A_ji)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        self.add(&self.adjoint().scale(Complex64::new(-1.0, 0.0)))
            .val
            .iter()
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Largest absolute row sum, an upper bound on the spectral norm of
    /// Hermitian matrices.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.val[k].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// `exp(−iHt) ψ` by a Taylor series on sub-steps with `‖H‖ dt ≤ 1/2`.
pub fn expm_apply(h: &SparseMatrix, t: f64, psi: &[Complex64]) -> Vec<Complex64> {
    let norm = h.norm_inf();
    let steps = ((norm * t.abs()) / 0.5).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let mut state = psi.to_vec();
    let mut term = vec![ZERO; psi.len()];
    let mut next = vec![ZERO; psi.len()];
    for _ in 0..steps {
        term.copy_from_slice(&state);
        let mut acc = state.clone();
        for k in 1..60 {
            h.apply(&term, &mut next);
            let f = Complex64::new(0.0, -dt / k as f64);
            let mut size = 0.0f64;
            for (tv, nv) in term.iter_mut().zip(&next) {
                *tv = nv * f;
                size = size.max(tv.norm());
            }
            for (a, tv) in acc.iter_mut().zip(&term) {
                *a += tv;
            }
            if size < 1e-18 {
                break;
            }
        }
        state = acc;
    }
    state
}

pub fn norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
