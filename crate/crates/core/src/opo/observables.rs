use super::density::DensityOperator;
use crate::fock::Register;
use crate::special::ln_factorial;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Partial trace keeping one mode of the register.
pub fn reduce(rho: &DensityOperator, reg: &Register, keep: usize) -> Result<DensityOperator> {
    if keep >= reg.modes() {
        return Err(Error::Domain(format!("mode {keep} not in a {}-mode register", reg.modes())));
    }
    if rho.dim != reg.dim() {
        return Err(Error::Domain("density matrix does not match register".into()));
    }
    let m = reg.levels()[keep];
    let mut out = DensityOperator::zeros(m);
    out.time = rho.time;
    let stride: usize = reg.levels()[keep + 1..].iter().product();
    // i = hi·(m·stride) + n·stride + lo
    let block = m * stride;
    let outer = reg.dim() / block;
    for hi in 0..outer {
        for lo in 0..stride {
            let base = hi * block + lo;
            for a in 0..m {
                let i = base + a * stride;
                for b in 0..m {
                    out.data[a * m + b] += rho.get(i, base + b * stride);
                }
            }
        }
    }
    Ok(out)
}

/// Adds `w · Tr_{others} |ψ⟩⟨ψ|` to `acc`.
pub fn accumulate_reduced(psi: &[Complex64], reg: &Register, keep: usize, w: f64, acc: &mut DensityOperator) {
    let m = reg.levels()[keep];
    let stride: usize = reg.levels()[keep + 1..].iter().product();
    let block = m * stride;
    let outer = reg.dim() / block;
    for hi in 0..outer {
        for lo in 0..stride {
            let base = hi * block + lo;
            for a in 0..m {
                let x = psi[base + a * stride] * w;
                if x == ZERO {
                    continue;
                }
                for b in 0..m {
                    acc.data[a * m + b] += x * psi[base + b * stride].conj();
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    pub p: Vec<f64>,
    /// Probability in the two highest retained levels.
    pub leakage: f64,
}

pub fn photon_distribution(rho1: &DensityOperator) -> PhotonDistribution {
    let p = rho1.diagonal();
    let k = p.len();
    let leakage = p[k.saturating_sub(2)..].iter().sum();
    PhotonDistribution { p, leakage }
}

pub fn mean_number(rho1: &DensityOperator) -> f64 {
    rho1.diagonal().iter().enumerate().map(|(n, p)| n as f64 * p).sum()
}

/// `g⁽³⁾ = Tr[a†³a³ρ]/⟨n⟩³`.
pub fn g3(rho1: &DensityOperator) -> Result<f64> {
    let p = rho1.diagonal();
    let n: f64 = p.iter().enumerate().map(|(k, q)| k as f64 * q).sum();
    if n <= 0.0 {
        return Err(Error::Domain("g3 undefined for zero mean photon number".into()));
    }
    let m3: f64 = p.iter().enumerate().map(|(k, q)| (k * k.saturating_sub(1) * k.saturating_sub(2)) as f64 * q).sum();
    Ok(m3 / (n * n * n))
}

/// Largest coherence `|ρ_mn|` with `m − n ≢ 0 (mod 3)`; zero for states
/// invariant under `exp(i 2π/3 a†a)`.
pub fn z3_residual(rho1: &DensityOperator) -> f64 {
    let n = rho1.dim;
    let mut r = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if (i + 3 * n - j) % 3 != 0 {
                r = r.max(rho1.get(i, j).norm());
            }
        }
    }
    r
}

/// Projection onto the 2π/3-rotation invariant part.
pub fn z3_symmetrize(rho1: &DensityOperator) -> DensityOperator {
    let mut out = rho1.clone();
    let n = rho1.dim;
    for i in 0..n {
        for j in 0..n {
            if (i + 3 * n - j) % 3 != 0 {
                out.data[i * n + j] = ZERO;
            }
        }
    }
    out
}

/// Wigner function at phase-space point `(x, y)` with `α = (x + iy)/√2`,
/// normalised so that `∫ W dx dy = 1`.
///
/// Matrix elements of the displaced parity operator are generated with a
/// scaled Laguerre recurrence seeded in log space, which stays finite for
/// large photon numbers and radii.
pub fn wigner_point(rho1: &DensityOperator, x: f64, y: f64) -> f64 {
    let n = rho1.dim;
    let alpha = Complex64::new(x, y) / 2f64.sqrt();
    let r = alpha.norm();
    let theta = alpha.arg();
    let u = 4.0 * r * r;
    let mut total = 0.0;
    for k in 0..n {
        let seed = if k == 0 {
            (-u / 2.0).exp()
        } else if r == 0.0 {
            0.0
        } else {
            (k as f64 * (2.0 * r).ln() - u / 2.0 - 0.5 * ln_factorial(k)).exp()
        };
        if seed == 0.0 && k > 0 {
            continue;
        }
        let kf = k as f64;
        let phase = Complex64::from_polar(1.0, kf * theta);
        let mut prev = 0.0;
        let mut cur = seed;
        let mut acc = ZERO;
        for m in 0..(n - k) {
            if m == 1 {
                prev = seed;
                cur = seed * (1.0 + kf - u) / (kf + 1.0).sqrt();
            } else if m > 1 {
                let mf = (m - 1) as f64;
                let next = ((2.0 * mf + kf + 1.0 - u) * cur - (mf * (mf + kf)).sqrt() * prev)
                    / ((mf + 1.0) * (mf + kf + 1.0)).sqrt();
                prev = cur;
                cur = next;
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            acc += rho1.get(m, m + k) * (sign * cur);
        }
        total += if k == 0 { acc.re } else { 2.0 * (acc * phase).re };
    }
    total / PI
}

/// Wigner function on the Cartesian product `xs × ys`, row-major in `ys`
/// (outer) then `xs`.
pub fn wigner_grid(rho1: &DensityOperator, xs: &[f64], ys: &[f64]) -> Vec<f64> {
    ys.par_iter()
        .flat_map_iter(|&y| xs.iter().map(move |&x| wigner_point(rho1, x, y)))
        .collect()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Coherent state `|β⟩` on `levels` Fock levels (not renormalised).
pub fn coherent_state(beta: Complex64, levels: usize) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(levels);
    let mut c = Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for n in 0..levels {
        if n > 0 {
            c = c * beta / (n as f64).sqrt();
        }
        v.push(c);
    }
    v
}
