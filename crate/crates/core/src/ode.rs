//! Adaptive Dormand–Prince 5(4) integration of complex-valued systems.

use crate::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-8, atol: 1e-10, h0: 1e-3, h_min: 1e-12, h_max: f64::INFINITY, max_steps: 10_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// State of an in-progress integration; the last accepted step size is kept
/// so consecutive calls continue smoothly.
pub struct Dopri<F> {
    f: F,
    pub opts: OdeOptions,
    h: f64,
    k: [Vec<Complex64>; 7],
    tmp: Vec<Complex64>,
    fsal_valid: bool,
    pub steps: usize,
    pub rejected: usize,
}

fn lin(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = Complex64::new(0.0, 0.0);
        for (c, k) in terms {
            s += k[i] * *c;
        }
        *o = y[i] + s * h;
    }
}

impl<F: FnMut(f64, &[Complex64], &mut [Complex64]) -> Result<()>> Dopri<F> {
    pub fn new(f: F, n: usize, opts: OdeOptions) -> Self {
        let z = || vec![Complex64::new(0.0, 0.0); n];
        Dopri {
            f,
            h: opts.h0,
            opts,
            k: [z(), z(), z(), z(), z(), z(), z()],
            tmp: z(),
            fsal_valid: false,
            steps: 0,
            rejected: 0,
        }
    }

    /// Advances `y` from `t` to `t_end` in place.
    pub fn integrate(&mut self, t: &mut f64, y: &mut Vec<Complex64>, t_end: f64) -> Result<()> {
        if !self.fsal_valid {
            (self.f)(*t, y, &mut self.k[0])?;
            self.fsal_valid = true;
        }
        let mut ynew = y.clone();
        while *t < t_end {
            if self.steps >= self.opts.max_steps {
                return Err(Error::Numerical(format!("step budget exhausted at t = {t}")));
            }
            let mut h = self.h.min(self.opts.h_max).min(t_end - *t);
            let last = h >= t_end - *t;
            let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
            lin(&mut self.tmp, y, h, &[(A21, k1)]);
            (self.f)(*t + C2 * h, &self.tmp, k2)?;
            lin(&mut self.tmp, y, h, &[(A31, k1), (A32, k2)]);
            (self.f)(*t + C3 * h, &self.tmp, k3)?;
            lin(&mut self.tmp, y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
            (self.f)(*t + C4 * h, &self.tmp, k4)?;
            lin(&mut self.tmp, y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
            (self.f)(*t + C5 * h, &self.tmp, k5)?;
            lin(&mut self.tmp, y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]);
            (self.f)(*t + h, &self.tmp, k6)?;
            lin(&mut ynew, y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
            (self.f)(*t + h, &ynew, k7)?;
            let mut err = 0.0f64;
            for i in 0..y.len() {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
                let sc = self.opts.atol + self.opts.rtol * y[i].norm().max(ynew[i].norm());
                err = err.max(e.norm() / sc);
            }
            if !err.is_finite() {
                return Err(Error::Numerical(format!("non-finite derivative at t = {t}")));
            }
            if err <= 1.0 {
                *t = if last { t_end } else { *t + h };
                std::mem::swap(y, &mut ynew);
                self.k.swap(0, 6);
                self.steps += 1;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
            } else {
                self.rejected += 1;
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < self.opts.h_min {
                    return Err(Error::Numerical(format!("step size underflow (h = {h:.3e}) at t = {t}")));
                }
                self.h = h;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillator() {
        // y' = i y
        let f = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = Complex64::new(0.0, 1.0) * y[0];
            Ok(())
        };
        let mut d = Dopri::new(f, 1, OdeOptions { rtol: 1e-11, atol: 1e-13, ..Default::default() });
        let mut y = vec![Complex64::new(1.0, 0.0)];
        let mut t = 0.0;
        d.integrate(&mut t, &mut y, 1.0).unwrap();
        d.integrate(&mut t, &mut y, 10.0).unwrap();
        assert_eq!(t, 10.0);
        assert!((y[0] - Complex64::from_polar(1.0, 10.0)).norm() < 1e-9);
    }
}
