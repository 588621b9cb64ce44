//! Property tests over the public API.

use crate::fock::Register;
use crate::jsa::*;
use crate::opo::*;
use crate::qpm::*;
use crate::special::dirichlet;
use crate::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn dual_grid() -> impl Strategy<Value = DualGrid> {
    (1usize..60, 0.3f64..4.0, 0usize..60, 0.3f64..4.0, -2.0f64..2.0, -2.0f64..2.0)
        .prop_map(|(m, l1, n, l2, chi1, chi2)| DualGrid { m, l1, n, l2, chi1, chi2 })
}

fn layers() -> impl Strategy<Value = Vec<LayerTerm>> {
    prop::collection::vec((0.1f64..3.0, -2.0f64..2.0), 1..40)
        .prop_map(|v| v.into_iter().map(|(length, chi)| LayerTerm { length, chi, delta_k: 0.0 }).collect())
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn coupling_sum_is_linear_in_chi(mut t in layers(), dk in -5.0f64..5.0, c in -3.0f64..3.0) {
        t.iter_mut().for_each(|x| x.delta_k = dk);
        let base = coupling_sum(&t);
        let scaled: Vec<LayerTerm> = t.iter().map(|x| LayerTerm { chi: c * x.chi, ..*x }).collect();
        let s = coupling_sum(&scaled);
        prop_assert!((s - base * c).norm() <= 1e-12 * (1.0 + s.norm()));
    }

    #[test]
    fn zero_mismatch_sums_chi_times_length(t in layers()) {
        let expect: f64 = t.iter().map(|x| x.chi * x.length).sum();
        let s = coupling_sum(&t);
        prop_assert!((s - Complex64::new(expect, 0.0)).norm() <= 1e-12 * (1.0 + expect.abs()));
    }

    #[test]
    fn coupling_magnitude_is_even_in_mismatch(mut t in layers(), dk in 0.0f64..5.0) {
        t.iter_mut().for_each(|x| x.delta_k = dk);
        let plus = coupling_sum(&t).norm();
        t.iter_mut().for_each(|x| x.delta_k = -dk);
        let minus = coupling_sum(&t).norm();
        prop_assert!((plus - minus).abs() <= 1e-12 * (1.0 + plus));
    }

    #[test]
    fn dual_grid_closed_form_equals_enumeration(g in dual_grid(), dk in -6.0f64..6.0) {
        let sum = coupling_sum(&g.expand(dk));
        let closed = zeta_dualgrid(&g, dk, PhaseConvention::Exact).total();
        let scale = g.chi1.abs() * g.section1_length() + g.chi2.abs() * g.section2_length();
        prop_assert!((closed - sum).norm() <= 1e-10 * scale.max(1e-300));
        let printed = zeta_dualgrid(&g, dk, PhaseConvention::Printed);
        let exact = zeta_dualgrid(&g, dk, PhaseConvention::Exact);
        prop_assert!((printed.first.norm() - exact.first.norm()).abs() <= 1e-12 * (1.0 + exact.first.norm()));
    }

    #[test]
    fn dirichlet_kernel_peaks_at_grating_vector(m in 1usize..200, x in -3.0f64..3.0) {
        prop_assert!(dirichlet(m, x).abs() <= m as f64 * (1.0 + 1e-12));
        prop_assert!((dirichlet(m, 0.0) - m as f64).abs() < 1e-9);
    }

    #[test]
    fn first_section_zeros_at_lobe_edges(m in 2usize..80, l1 in 0.5f64..3.0, k in 1usize..3) {
        let g = DualGrid { m, l1, n: 0, l2: 1.0, chi1: 1.0, chi2: 0.0 };
        // Dirichlet zeros at Δk = q₁ ± 2πk/(m l₁), k not a multiple of m
        prop_assume!(k % m != 0);
        let dk = g.q1() + 2.0 * PI * k as f64 / g.section1_length();
        let v = zeta_dualgrid(&g, dk, PhaseConvention::Exact).first.norm();
        prop_assert!(v <= 1e-9 * g.section1_length());
    }
}

fn velocities() -> impl Strategy<Value = InverseVelocities> {
    (0.5f64..3.0, -0.5f64..0.5, -0.5f64..0.5, -0.5f64..0.5, 0.5f64..3.0, -0.5f64..0.5, -0.5f64..0.5).prop_map(|(p, a, b, c, s, d, e)| {
        InverseVelocities { pump: p, daughter: [p + a, p + b], intermediate: p + c, spacer_intermediate: s, spacer_daughter: [s + d, s + e] }
    })
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn gaussian_cross_terms_are_the_heralding_residuals(
        v in velocities(), l1 in 0.1f64..3.0, l2 in 0.1f64..3.0, l3 in 0.0f64..3.0, m in 1usize..30, n in 1usize..30, tau in 0.2f64..3.0,
    ) {
        use Polarization::{E, O};
        let w = WalkoffSet::from_inverse_velocities(&v, (l1, l2, l3), m, n, tau);
        let f = gaussian_form(&w, [E, O, O], PairCoefficient::Consistent);
        let r = heralding_residuals(&w);
        for (a, b) in [(f.c12, r.r12), (f.c13, r.r13), (f.c23, r.r23)] {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        prop_assert!(f.a.iter().all(|&a| a >= tau * tau / 2.0));
    }

    #[test]
    fn gaussian_amplitude_symmetric_under_photon_exchange(
        v in velocities(), l in (0.1f64..3.0, 0.1f64..3.0, 0.0f64..3.0), m in 1usize..20, n in 1usize..20,
        nu in (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0),
    ) {
        use Polarization::{E, O};
        let w = WalkoffSet::from_inverse_velocities(&v, l, m, n, 1.0);
        let a = amplitude_gaussian(nu, &w, [E, O, O], PairCoefficient::Consistent);
        let b = amplitude_gaussian((nu.0, nu.2, nu.1), &w, [E, O, O], PairCoefficient::Consistent);
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn resonant_amplitude_symmetric_under_photon_exchange(
        z in -2.0f64..2.0, x in 0.1f64..2.0, c in 18.0f64..22.0, wdt in 0.2f64..3.0,
        nu in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
    ) {
        let coup = LorentzianCouplings { zeta0: Complex64::new(z, 0.3), xi0: Complex64::new(x, 0.0), center: c, width: wdt };
        let pulse = PumpPulse { e0: Complex64::new(1.0, 0.0), tau_p: 0.8, omega0: 30.0, phase: 0.0 };
        let a = amplitude_resonant(nu, &coup, &pulse);
        let b = amplitude_resonant((nu.0, nu.2, nu.1), &coup, &pulse);
        prop_assert!((a - b).norm() <= 1e-13 * (1.0 + a.norm()));
    }
}

fn purity_1_23(c12: f64, a: [f64; 3]) -> f64 {
    let f = GaussianForm { a, c12, c13: 0.0, c23: 0.0, phase: [0.0; 3] };
    let g = JointAmplitudeGrid::build(default_axes(&f, 24, 5.0).unwrap(), [Polarization::E, Polarization::O, Polarization::O], Route::Gaussian, |x, y, z| {
        Ok(f.eval((x, y, z)))
    })
    .unwrap();
    schmidt_analysis(&g, Bipartition::One).unwrap().purity
}

proptest! {
    #![proptest_config(cfg(12))]

    #[test]
    fn purity_falls_as_residual_grows(a1 in 0.5f64..2.0, a2 in 0.5f64..2.0, s in 0.05f64..0.45, t in 0.05f64..0.45) {
        // |c₁₂| < 2√(a₁a₂) keeps the form normalisable
        let lim = 2.0 * (a1 * a2).sqrt();
        let (lo, hi) = if s < t { (s, t) } else { (t, s) };
        prop_assume!(hi - lo > 0.02);
        let p0 = purity_1_23(0.0, [a1, a2, 1.0]);
        let p_lo = purity_1_23(lo * lim, [a1, a2, 1.0]);
        let p_hi = purity_1_23(hi * lim, [a1, a2, 1.0]);
        prop_assert!((p0 - 1.0).abs() < 1e-9);
        prop_assert!(p0 > p_lo && p_lo > p_hi);
    }
}

fn random_state(seed: &[(f64, f64)]) -> DensityOperator {
    let psi: Vec<Complex64> = seed.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
    let n = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1e-12);
    DensityOperator::from_pure(&psi.iter().map(|v| v / n).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(cfg(32))]

    #[test]
    fn z3_projection_is_idempotent_and_rotation_invariant(
        amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4..10), x in -2.0f64..2.0, y in -2.0f64..2.0,
    ) {
        let rho = random_state(&amps);
        let s = z3_symmetrize(&rho);
        prop_assert!(z3_residual(&s) == 0.0);
        prop_assert_eq!(z3_symmetrize(&s), s.clone());
        prop_assert!((s.trace() - rho.trace()).norm() < 1e-14);
        let (c, sn) = ((2.0 * PI / 3.0).cos(), (2.0 * PI / 3.0).sin());
        let w0 = wigner_point(&s, x, y);
        let w1 = wigner_point(&s, c * x - sn * y, sn * x + c * y);
        prop_assert!((w0 - w1).abs() < 1e-10);
    }

    #[test]
    fn fock_state_wigner_origin_value(n in 0usize..12) {
        let w = wigner_point(&DensityOperator::basis(n + 1, n), 0.0, 0.0);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((w - sign / PI).abs() < 1e-9);
    }

    #[test]
    fn lindblad_generator_preserves_trace_and_hermiticity(
        amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 27), e in 0.0f64..3.0, phi in -PI..PI,
    ) {
        let p = OpoParams { e, phi, zeta_p: 0.3, xi_p: 0.2, gamma0: 1.0, gamma1: 0.7, gamma2: 1.3 };
        let model = build_model(&p, ModelKind::ThreeMode, Truncation::new(2, 2, 2)).unwrap();
        let rho = random_state(&amps);
        let mut out = vec![Complex64::new(0.0, 0.0); model.dim() * model.dim()];
        LindbladRhs::new(&model).eval(&rho.data, &mut out);
        let n = model.dim();
        let tr: Complex64 = (0..n).map(|i| out[i * n + i]).sum();
        prop_assert!(tr.norm() < 1e-12);
        for i in 0..n {
            for j in 0..n {
                prop_assert!((out[i * n + j] - out[j * n + i].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hamiltonian_conserves_cascade_charge(zeta in 0.0f64..2.0, xi in 0.0f64..2.0) {
        let p = OpoParams { e: 0.0, phi: 0.0, zeta_p: zeta, xi_p: xi, gamma0: 0.0, gamma1: 0.0, gamma2: 0.0 };
        let m = build_model(&p, ModelKind::ThreeMode, Truncation::new(2, 5, 3)).unwrap();
        let reg: &Register = &m.register;
        let q = reg.weighted_number(&m.charge_weights());
        for (i, j, v) in m.h.triplets() {
            prop_assert!(v.norm() == 0.0 || q[i] == q[j], "H couples charge {} to {}", q[i], q[j]);
        }
    }

    #[test]
    fn bright_branch_grows_with_drive(e1 in 1.0f64..2.0, de in 0.01f64..1.0) {
        let p = dissipative_params();
        let a = semiclassical_steady(&p, e1).unwrap();
        let b = semiclassical_steady(&p, e1 + de).unwrap();
        prop_assert!(b.n1 > a.n1 && b.n2 >= a.n2 * (1.0 - 1e-12));
    }

    #[test]
    fn threshold_scales_with_pump_loss(g0 in 0.1f64..10.0, k in 0.1f64..10.0) {
        let p = OpoParams { gamma0: g0, ..dissipative_params() };
        let q = OpoParams { gamma0: k * g0, ..dissipative_params() };
        prop_assert!((q.threshold().unwrap() - k * p.threshold().unwrap()).abs() <= 1e-12 * q.threshold().unwrap());
    }

    #[test]
    fn escalation_grows_every_cutoff(a in 0usize..50, b in 0usize..300, c in 0usize..80) {
        let t = Truncation::new(a, b, c);
        let u = t.escalated();
        prop_assert!(u.n0_max > a && u.n1_max > b && u.n2_max > c);
    }

    #[test]
    fn photon_distribution_of_coherent_state_sums_to_one(re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let rho = DensityOperator::from_pure(&coherent_state(Complex64::new(re, im), 40));
        let d = photon_distribution(&rho);
        prop_assert!((d.p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!((mean_number(&rho) - (re * re + im * im)).abs() < 1e-8);
    }
}
