//! Special functions shared by the coupling, amplitude and Wigner code.

use std::f64::consts::PI;

/// Unnormalised cardinal sine, `sin(x)/x` with `sinc(0) = 1`.
///
/// This is the single definition of sinc used by every coupling formula.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Dirichlet kernel `sin(m x) / sin(x)`.
///
/// Near the poles of `1/sin(x)` (x ≈ jπ) the argument is reduced and a
/// series branch is used, giving the limit `m (−1)^{j(m−1)}`.
pub fn dirichlet(m: usize, x: f64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let mf = m as f64;
    let j = (x / PI).round();
    let y = x - j * PI;
    if y.abs() < 1e-8 {
        let sign = if (j as i64).rem_euclid(2) == 1 && m % 2 == 0 {
            -1.0
        } else {
            1.0
        };
        return sign * mf * (1.0 - (mf * mf - 1.0) * y * y / 6.0);
    }
    (mf * x).sin() / x.sin()
}

/// `ln(n!)` via direct summation for small n and Stirling with corrections
/// beyond that.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 32 {
        (2..=n).map(|k| (k as f64).ln()).sum()
    } else {
        let x = n as f64 + 1.0;
        // ln Γ(x), x ≥ 33
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3))
            + 1.0 / (1260.0 * x.powi(5))
    }
}

/// Generalised Laguerre polynomial `L_n^{(k)}(x)` by forward recurrence.
pub fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let kf = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + kf - x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kf - x) * cur - (jf + kf) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sinc_branches_agree() {
        for &x in &[1e-5, 9.9e-5, 1.01e-4, 0.3, -2.0] {
            assert_relative_eq!(sinc(x), if x == 0.0 { 1.0 } else { x.sin() / x }, max_relative = 1e-14);
        }
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(PI).abs() < 1e-16);
    }

    #[test]
    fn dirichlet_limits() {
        assert_relative_eq!(dirichlet(7, 0.0), 7.0);
        assert_relative_eq!(dirichlet(7, 1e-10), 7.0, max_relative = 1e-12);
        // x → π: sin(mx)/sin(x) → m(−1)^{m−1}
        assert_relative_eq!(dirichlet(4, PI), -4.0);
        assert_relative_eq!(dirichlet(5, PI + 1e-12), 5.0, max_relative = 1e-10);
        let x = 0.37;
        assert_relative_eq!(dirichlet(9, x), (9.0 * x).sin() / x.sin(), max_relative = 1e-14);
        // first zero
        assert!(dirichlet(10, PI / 10.0).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_matches_geometric_sum() {
        for &m in &[1usize, 2, 5, 13] {
            for &x in &[0.1, 1.0, 2.9, -0.7] {
                let s: f64 = (0..m).map(|j| ((m as f64 - 1.0 - 2.0 * j as f64) * x).cos()).sum();
                assert_relative_eq!(dirichlet(m, x), s, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ln_factorial_stirling_branch() {
        let exact: f64 = (2..=40).map(|k| (k as f64).ln()).sum();
        assert_relative_eq!(ln_factorial(40), exact, max_relative = 1e-13);
        assert_eq!(ln_factorial(0), 0.0);
    }

    #[test]
    fn laguerre_low_orders() {
        let x = 0.7;
        assert_relative_eq!(laguerre(2, 0, x), 0.5 * (x * x - 4.0 * x + 2.0), epsilon = 1e-14);
        assert_relative_eq!(laguerre(2, 3, x), 0.5 * (x * x - 10.0 * x + 20.0), epsilon = 1e-14);
    }
}
