mod common;

use common::{perturbed_preset, preset_fp, rel_close, rng, select};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use wavetrain_core::model::{Param, SystemId};
use wavetrain_core::stability::{
    analyze_hopf, char_coeffs, coeffs_at, critical_speeds, hopf_curve, hopf_frequency, hopf_quantity,
    omega_squared_closed_form, quartic_roots, routh_hurwitz, transversality, CharCoeffs,
};

fn random_coeffs(rng: &mut impl Rng) -> CharCoeffs {
    CharCoeffs::new(
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
    )
}

#[test]
fn routh_hurwitz_agrees_with_eigenvalue_oracle() {
    let mut rng = rng(1);
    let mut draws = 0;
    let mut stable = 0;
    while draws < 1000 {
        let b = random_coeffs(&mut rng);
        let rh = routh_hurwitz(&b);
        let roots = quartic_roots(&b);
        let max_re = roots.max_real_part();
        if [rh.c1, rh.c2, rh.c3, rh.c4].iter().any(|c| c.abs() < 1e-8) || max_re.abs() < 1e-10 {
            continue;
        }
        draws += 1;
        stable += rh.stable as usize;
        assert_eq!(rh.stable, max_re < 0.0, "{b:?} roots {:?}", roots.roots);
    }
    assert!(stable > 0, "draws never hit the stable region");
}

#[test]
fn stable_draws_are_not_rare() {
    // Coefficients from random stable root sets: RH must accept every one.
    let mut rng = rng(2);
    for _ in 0..500 {
        let p1 = Complex64::new(-rng.random_range(0.01..3.0), rng.random_range(0.0..3.0));
        let (r3, r4) = (-rng.random_range(0.01..3.0), -rng.random_range(0.01..3.0));
        let roots = [p1, p1.conj(), Complex64::new(r3, 0.0), Complex64::new(r4, 0.0)];
        let mut c = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        for r in roots {
            for i in (1..5).rev() {
                c[i] = c[i] - r * c[i - 1];
            }
        }
        let b = CharCoeffs::new(c[1].re, c[2].re, c[3].re, c[4].re);
        assert!(routh_hurwitz(&b).stable, "{b:?}");
    }
}

#[test]
fn quartic_roots_have_small_residual() {
    let mut rng = rng(3);
    for _ in 0..1000 {
        let b = random_coeffs(&mut rng);
        for z in quartic_roots(&b).roots {
            let res = b.eval(z).norm();
            assert!(res < 1e-8 * (1.0 + z.norm().powi(4)), "{b:?} {z} {res:e}");
        }
    }
}

#[test]
fn discriminant_sign_matches_root_pattern() {
    let mut rng = rng(4);
    for _ in 0..1000 {
        let e = quartic_roots(&random_coeffs(&mut rng));
        let real = e.real_roots(1e-9).len();
        if e.discriminant.abs() < 1e-8 {
            continue;
        }
        // Two real roots and one complex pair exactly when Δ < 0.
        assert_eq!(e.discriminant < 0.0, real == 2, "{:?} Δ={}", e.roots, e.discriminant);
    }
}

#[test]
fn hopf_identity_at_random_speeds() {
    let mut rng = rng(5);
    for id in SystemId::ALL {
        let (spec, fp) = preset_fp(id);
        let curve = hopf_curve(&spec, &fp).unwrap();
        for _ in 0..20 {
            let v: f64 = rng.random_range(-5.0..5.0);
            let h = hopf_quantity(&spec, &fp, v).unwrap();
            let scale = h.abs().max((curve.a * v.powi(4)).abs()).max((curve.b * v * v).abs());
            assert!((h - curve.eval(v)).abs() <= 1e-8 * scale, "{id} v={v}: {h} vs {}", curve.eval(v));
        }
    }
}

#[test]
fn coefficient_parity_and_trace_identity() {
    let mut rng = rng(6);
    for id in SystemId::ALL {
        let (spec, fp) = preset_fp(id);
        for _ in 0..20 {
            let v: f64 = rng.random_range(-5.0..5.0);
            let p = coeffs_at(&spec, &fp, v).unwrap();
            let m = coeffs_at(&spec, &fp, -v).unwrap();
            let scale = p.to_array().iter().fold(1.0_f64, |s, x| s.max(x.abs()));
            for (x, y) in [(p.b1, -m.b1), (p.b2, m.b2), (p.b3, -m.b3), (p.b4, m.b4)] {
                assert!((x - y).abs() <= 1e-12 * scale, "{id} v={v}: {p:?} {m:?}");
            }
            let (d1, d2) = (spec.d1(), spec.d2());
            assert!(rel_close(p.b1, (d1 + d2) * v / (d1 * d2), 1e-14), "{id}");
        }
    }
}

#[test]
fn char_coeffs_match_trace_and_determinant() {
    let mut rng = rng(7);
    for _ in 0..200 {
        let j = wavetrain_core::Matrix4::from_fn(|_, _| rng.random_range(-3.0..3.0));
        let b = char_coeffs(&j);
        assert!((b.b1 + j.trace()).abs() < 1e-12);
        assert!((b.b4 - j.determinant()).abs() < 1e-10);
        // Every eigenvalue is a root of the characteristic quartic.
        for z in j.complex_eigenvalues().iter() {
            assert!(b.eval(*z).norm() < 1e-8 * (1.0 + z.norm().powi(4)));
        }
    }
}

#[test]
fn closed_form_coefficients_system_a() {
    let mut rng = rng(8);
    for _ in 0..5 {
        let spec = perturbed_preset(SystemId::A, &mut rng);
        let fp = select(&spec).unwrap();
        let v: f64 = rng.random_range(-3.0..3.0);
        let b = coeffs_at(&spec, &fp, v).unwrap();
        let (eps, gamma) = (spec.param(Param::Eps).unwrap(), spec.param(Param::Gamma).unwrap());
        let (d1, d2) = (spec.d1(), spec.d2());
        assert!(rel_close(b.b1, (d1 + d2) * v / (d1 * d2), 1e-8));
        assert!(rel_close(b.b2, v * v / (d1 * d2), 1e-8));
        assert!(b.b3.abs() <= 1e-8 * b.b4.abs().max(b.b2.abs()));
        assert!(rel_close(b.b4, eps * gamma / (d1 * d2), 1e-8));
    }
}

#[test]
fn closed_form_coefficients_system_b() {
    let mut rng = rng(9);
    for _ in 0..5 {
        let spec = perturbed_preset(SystemId::B, &mut rng);
        let fp = select(&spec).unwrap();
        let v: f64 = rng.random_range(-3.0..3.0);
        let b = coeffs_at(&spec, &fp, v).unwrap();
        let p = |x| spec.param(x).unwrap();
        let (eps, gamma, beta, k) = (p(Param::Eps), p(Param::Gamma), p(Param::Beta), p(Param::K));
        let (d1, d2) = (spec.d1(), spec.d2());
        let den = beta * k * d1 * d2;
        assert!(rel_close(b.b1, (d1 + d2) * v / (d1 * d2), 1e-8));
        assert!(rel_close(b.b2, (beta * k * v * v - eps * gamma * d2) / den, 1e-8));
        assert!(rel_close(b.b3, -eps * gamma * v / den, 1e-8));
        assert!(rel_close(b.b4, eps * gamma * (beta * k - gamma) / den, 1e-8));
    }
}

#[test]
fn closed_form_coefficients_system_e() {
    let mut rng = rng(10);
    let mut checked = 0;
    while checked < 5 {
        let spec = perturbed_preset(SystemId::E, &mut rng);
        let Some(fp) = select(&spec) else { continue };
        checked += 1;
        let v: f64 = rng.random_range(-3.0..3.0);
        let b = coeffs_at(&spec, &fp, v).unwrap();
        let p = |x| spec.param(x).unwrap();
        let (alpha, beta, gamma, delta, k) = (p(Param::Alpha), p(Param::Beta), p(Param::Gamma), p(Param::Delta), p(Param::K));
        let (d1, d2) = (spec.d1(), spec.d2());
        let (n, pp) = (fp.n0, fp.p0);
        let s = (1.0 + n * n).powi(2);
        let b2 = (v * v + beta * n * d1 - gamma * d1 * (1.0 + 3.0 * k * pp * pp)
            + d2 / s * (1.0 - alpha * pp - n * (n + alpha * n * pp * (2.0 + n * n) - 2.0 * delta)))
            / (d1 * d2);
        let b4 = (alpha * beta * n * pp
            - (beta * n - gamma * (1.0 + 3.0 * k * pp * pp))
                * (alpha * pp - 1.0 + n * (n - 2.0 * delta + alpha * n * pp * (2.0 + n * n)))
                / s)
            / (d1 * d2);
        assert!(rel_close(b.b1, (d1 + d2) * v / (d1 * d2), 1e-8));
        assert!(rel_close(b.b2, b2, 1e-8), "{} vs {b2}", b.b2);
        assert!(rel_close(b.b4, b4, 1e-8), "{} vs {b4}", b.b4);
    }
}

#[test]
fn closed_form_coefficients_system_c_at_reference_point() {
    // D is C with ε replaced by ε - k0.
    let (spec, fp) = preset_fp(SystemId::D);
    let p = |x| spec.param(x).unwrap();
    let (alpha, beta, c, d, k, k0) = (p(Param::Alpha), p(Param::Beta), p(Param::C), p(Param::D), p(Param::K), p(Param::K0));
    let eps = p(Param::Eps) - k0;
    let (d1, d2) = (spec.d1(), spec.d2());
    let den = (eps * c + alpha * beta * k) * d1 * d2;
    let v = critical_speeds(&hopf_curve(&spec, &fp).unwrap()).unwrap().v_plus;
    let b = coeffs_at(&spec, &fp, v).unwrap();
    let b2 = (alpha * (beta * k * v * v - eps * d * d2)
        + c * (eps * d * d1 - (eps * d2 + beta * k * d1) * k0 + eps * v * v))
        / den;
    // b3 carries k0 on its second term.
    let b3 = v * (eps * d * (c - alpha) - c * k0 * (eps + beta * k)) / den;
    let b4 = (alpha * d + c * k0) * (beta * k * k0 - eps * d) / den;
    assert!(rel_close(b.b1, (d1 + d2) * v / (d1 * d2), 1e-8));
    assert!(rel_close(b.b2, b2, 1e-8));
    assert!(rel_close(b.b3, b3, 1e-8));
    assert!(rel_close(b.b4, b4, 1e-8));
}

fn lemma_implication(id: SystemId) {
    let (spec, fp) = preset_fp(id);
    let Some(s) = critical_speeds(&hopf_curve(&spec, &fp).unwrap()) else { return };
    let b = coeffs_at(&spec, &fp, s.v_plus).unwrap();
    let e = quartic_roots(&b);
    if b.b1.powi(3) - 4.0 * b.b1 * b.b2 + 4.0 * b.b3 > 0.0 && b.b3 > 0.0 {
        assert!(e.discriminant < 0.0, "{id}: Δ = {}", e.discriminant);
        assert_eq!(e.real_roots(1e-9).len(), 2, "{id}: {:?}", e.roots);
    }
}

#[test]
fn lemma_discriminant_implication() {
    for id in [SystemId::B, SystemId::C, SystemId::D, SystemId::E] {
        lemma_implication(id);
    }
}

fn on_curve_residual(id: SystemId) {
    let (spec, fp) = preset_fp(id);
    let s = critical_speeds(&hopf_curve(&spec, &fp).unwrap()).expect("critical speeds");
    let b = coeffs_at(&spec, &fp, s.v_plus).unwrap();
    let w = hopf_frequency(&b).expect("imaginary pair at v+");
    let res = b.eval(Complex64::new(0.0, w)).norm();
    assert!(res < 1e-7, "{id}: |g(iω)| = {res:e}");
    let w2 = omega_squared_closed_form(&spec, &fp).unwrap();
    assert!(rel_close(w * w, w2, 1e-8), "{id}: {} vs {w2}", w * w);
}

#[test]
fn on_curve_factorization_system_b() {
    on_curve_residual(SystemId::B);
}

#[test]
fn on_curve_factorization_system_c() {
    on_curve_residual(SystemId::C);
}

#[test]
fn on_curve_factorization_system_d() {
    on_curve_residual(SystemId::D);
}

#[test]
fn on_curve_factorization_system_e() {
    on_curve_residual(SystemId::E);
}

fn transversality_sign(id: SystemId) {
    let (spec, fp) = preset_fp(id);
    let s = critical_speeds(&hopf_curve(&spec, &fp).unwrap()).unwrap();
    let rate = transversality(&spec, &fp, s.v_plus).expect("crossing pair at v+");
    let mirrored = transversality(&spec, &fp, s.v_minus).unwrap();
    assert!((rate - mirrored).abs() <= 1e-4 * rate.abs(), "{id}: {rate} vs {mirrored}");
    if spec.d1() + spec.d2() > 0.0 {
        assert!(rate < 0.0, "{id}: {rate}");
    }
}

#[test]
fn transversality_system_b() {
    transversality_sign(SystemId::B);
}

#[test]
fn transversality_system_d() {
    transversality_sign(SystemId::D);
}

#[test]
fn transversality_system_e() {
    transversality_sign(SystemId::E);
}

#[test]
fn analysis_invariants() {
    for id in SystemId::ALL {
        let (spec, fp) = preset_fp(id);
        let h = analyze_hopf(&spec, &fp).unwrap();
        if let (Some(lo), Some(hi)) = (h.v_minus, h.v_plus) {
            assert_eq!(lo, -hi);
            let f = hopf_quantity(&spec, &fp, hi).unwrap();
            let scale = (h.a * hi.powi(4)).abs().max(1.0);
            assert!(f.abs() <= 1e-8 * scale, "{id}: h(v+) = {f}");
        }
        if let (Some(w), Some(hi)) = (h.omega, h.v_plus) {
            let b = coeffs_at(&spec, &fp, hi).unwrap();
            assert!(rel_close(w * w, b.b3 / b.b1, 1e-10));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn routh_hurwitz_stable_iff_all_positive(b1 in -5.0..5.0f64, b2 in -5.0..5.0f64, b3 in -5.0..5.0f64, b4 in -5.0..5.0f64) {
        let rh = routh_hurwitz(&CharCoeffs::new(b1, b2, b3, b4));
        prop_assert_eq!(rh.stable, rh.c1 > 0.0 && rh.c2 > 0.0 && rh.c3 > 0.0 && rh.c4 > 0.0);
        prop_assert_eq!(rh.flags, [rh.c1 > 0.0, rh.c2 > 0.0, rh.c3 > 0.0, rh.c4 > 0.0]);
    }

    #[test]
    fn hopf_curve_is_even(v in 0.01..6.0f64) {
        let (spec, fp) = preset_fp(SystemId::B);
        let a = hopf_quantity(&spec, &fp, v).unwrap();
        let b = hopf_quantity(&spec, &fp, -v).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}
