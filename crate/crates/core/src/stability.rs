//! Linear stability of the traveling-wave fixed points as a function of the
//! wave speed `v`.
//!
//! At a fixed point the Jacobian has characteristic polynomial
//! `λ⁴ + b1 λ³ + b2 λ² + b3 λ + b4`. The Routh–Hurwitz quantity
//! `c4 = b1 (b2 b3 - b1 b4) - b3²` vanishes on the Hopf curve. Because `b1` and
//! `b3` are odd in `v` and `b2`, `b4` even, `c4` has the form
//! `h(v) = v² (A v² + B)`, so nonzero critical speeds exist only when
//! `A B < 0`.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::StabilityError;
use crate::model::{FixedPoint, ModelSpec};
use crate::poly::Polynomial;

/// Coefficients of `λ⁴ + b1 λ³ + b2 λ² + b3 λ + b4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharCoeffs {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
}

impl CharCoeffs {
    pub const fn new(b1: f64, b2: f64, b3: f64, b4: f64) -> Self {
        Self { b1, b2, b3, b4 }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.b1, self.b2, self.b3, self.b4]
    }

    /// The monic quartic, ascending coefficients.
    pub fn polynomial(&self) -> Polynomial {
        Polynomial::new(vec![self.b4, self.b3, self.b2, self.b1, 1.0])
    }

    /// `g(λ)` at a complex argument.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (((z + self.b1) * z + self.b2) * z + self.b3) * z + self.b4
    }
}

fn minor2(j: &Matrix4<f64>, a: usize, b: usize) -> f64 {
    j[(a, a)] * j[(b, b)] - j[(a, b)] * j[(b, a)]
}

fn minor3(j: &Matrix4<f64>, idx: [usize; 3]) -> f64 {
    let m = |r: usize, c: usize| j[(idx[r], idx[c])];
    m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
        + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
}

/// Characteristic coefficients from principal-minor sums.
pub fn char_coeffs(j: &Matrix4<f64>) -> CharCoeffs {
    let mut b2 = 0.0;
    for a in 0..4 {
        for b in a + 1..4 {
            b2 += minor2(j, a, b);
        }
    }
    let b3 = -[[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]
        .into_iter()
        .map(|idx| minor3(j, idx))
        .sum::<f64>();
    CharCoeffs::new(-j.trace(), b2, b3, j.determinant())
}

/// Routh–Hurwitz test quantities for a quartic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouthHurwitzReport {
    /// `b1`
    pub c1: f64,
    /// `b4`
    pub c2: f64,
    /// `b1 b2 - b3`
    pub c3: f64,
    /// `b1 (b2 b3 - b1 b4) - b3²`
    pub c4: f64,
    /// `flags[i]` is `c(i+1) > 0`.
    pub flags: [bool; 4],
    /// All four quantities strictly positive.
    pub stable: bool,
}

pub fn routh_hurwitz(b: &CharCoeffs) -> RouthHurwitzReport {
    let c1 = b.b1;
    let c2 = b.b4;
    let c3 = b.b1 * b.b2 - b.b3;
    let c4 = b.b1 * (b.b2 * b.b3 - b.b1 * b.b4) - b.b3 * b.b3;
    let flags = [c1 > 0.0, c2 > 0.0, c3 > 0.0, c4 > 0.0];
    RouthHurwitzReport { c1, c2, c3, c4, flags, stable: flags.iter().all(|&f| f) }
}

/// Characteristic coefficients of the Jacobian at `fp` for wave speed `v`.
pub fn coeffs_at(spec: &ModelSpec, fp: &FixedPoint, v: f64) -> Result<CharCoeffs, StabilityError> {
    Ok(char_coeffs(&spec.jacobian_at(v, fp)?))
}

/// `h(v)`, the fourth Routh–Hurwitz quantity as a function of `v`.
pub fn hopf_quantity(spec: &ModelSpec, fp: &FixedPoint, v: f64) -> Result<f64, StabilityError> {
    Ok(routh_hurwitz(&coeffs_at(spec, fp, v)?).c4)
}

/// `h(v) = v² (A v² + B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfCurve {
    pub a: f64,
    pub b: f64,
}

impl HopfCurve {
    pub fn eval(&self, v: f64) -> f64 {
        v * v * (self.a * v * v + self.b)
    }
}

const STRUCTURE_SAMPLES: [f64; 5] = [0.3, 0.75, 1.5, 2.6, 3.7];

/// Extracts `A` and `B` from `h(1)` and `h(2)`, then checks the quartic form
/// at five further speeds.
///
/// Coefficients below `1e-12` of the sampled magnitudes are snapped to zero,
/// so exactly degenerate curves report exact zeros.
pub fn hopf_curve(spec: &ModelSpec, fp: &FixedPoint) -> Result<HopfCurve, StabilityError> {
    let h1 = hopf_quantity(spec, fp, 1.0)?;
    let h2 = hopf_quantity(spec, fp, 2.0)?;
    let snap = 1e-12 * (h2.abs() + 4.0 * h1.abs());
    let zero_small = |x: f64| if x.abs() <= snap { 0.0 } else { x };
    let curve = HopfCurve { a: zero_small((h2 - 4.0 * h1) / 12.0), b: zero_small((16.0 * h1 - h2) / 12.0) };
    for v in STRUCTURE_SAMPLES {
        let h = hopf_quantity(spec, fp, v)?;
        let mismatch = (h - curve.eval(v)).abs();
        if !(mismatch <= 1e-8 * h.abs().max(1.0)) {
            return Err(StabilityError::HopfCurveStructure { v, mismatch });
        }
    }
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalSpeeds {
    pub v_minus: f64,
    pub v_plus: f64,
}

impl CriticalSpeeds {
    /// Both speeds are zero: the only root of `h` is the double root at `v = 0`.
    pub fn is_degenerate(&self) -> bool {
        self.v_plus == 0.0
    }
}

/// Real roots of `A v² + B = 0`.
///
/// `(∓√(-B/A))` when `A B < 0`; `(0, 0)` when `A` or `B` vanishes, where
/// `v = 0` is the only root; `None` otherwise.
pub fn critical_speeds(curve: &HopfCurve) -> Option<CriticalSpeeds> {
    let HopfCurve { a, b } = *curve;
    if a == 0.0 || b == 0.0 {
        Some(CriticalSpeeds { v_minus: 0.0, v_plus: 0.0 })
    } else if a * b < 0.0 {
        let v = (-b / a).sqrt();
        Some(CriticalSpeeds { v_minus: -v, v_plus: v })
    } else {
        None
    }
}

/// Sign pattern of `(A, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `A > 0, B < 0`: `h > 0` for `|v| > v+`.
    A,
    /// `A < 0, B > 0`: `h > 0` for `|v| < v+`.
    B,
    /// `A ≥ 0, B > 0`: `h > 0` for all `v ≠ 0`.
    C,
    /// `A ≤ 0, B < 0`: `h < 0` for all `v ≠ 0`.
    D,
    /// `B = 0`.
    Degenerate,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::A => "a",
            Regime::B => "b",
            Regime::C => "c",
            Regime::D => "d",
            Regime::Degenerate => "degenerate",
        }
    }

    /// Where `h(v) > 0`, in terms of the critical speed `v+`.
    pub fn positive_region(self) -> &'static str {
        match self {
            Regime::A => "|v| > v+",
            Regime::B => "0 < |v| < v+",
            Regime::C => "all v != 0",
            Regime::D => "none",
            Regime::Degenerate => "undetermined",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

pub fn classify_regime(curve: &HopfCurve) -> Regime {
    let HopfCurve { a, b } = *curve;
    if a > 0.0 && b < 0.0 {
        Regime::A
    } else if a < 0.0 && b > 0.0 {
        Regime::B
    } else if a >= 0.0 && b > 0.0 {
        Regime::C
    } else if a <= 0.0 && b < 0.0 {
        Regime::D
    } else {
        Regime::Degenerate
    }
}

/// `ω = √(b3/b1)`, the frequency of the imaginary pair on the Hopf curve.
pub fn hopf_frequency(b: &CharCoeffs) -> Result<f64, StabilityError> {
    let ratio = b.b3 / b.b1;
    if ratio > 0.0 {
        Ok(ratio.sqrt())
    } else {
        Err(StabilityError::NotHopf { ratio })
    }
}

/// Frequencies for the degenerate quartic `λ⁴ + b4` with `b4 < 0`.
///
/// Its roots are `±(-b4)^{1/4}` and `±i(-b4)^{1/4}`, so the true imaginary
/// pair has `fourth_root`. `operational` is `√(-b4)`, the value conventionally
/// quoted for this case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerateFrequency {
    pub fourth_root: f64,
    pub operational: f64,
}

/// Frequencies when `b3 = 0` and `b4 < 0`; `None` otherwise.
pub fn degenerate_frequency(b: &CharCoeffs) -> Option<DegenerateFrequency> {
    let scale = b.b1.abs() + b.b2.abs() + b.b4.abs();
    (b.b3.abs() <= 1e-12 * scale && b.b4 < 0.0).then(|| DegenerateFrequency {
        fourth_root: (-b.b4).powf(0.25),
        operational: (-b.b4).sqrt(),
    })
}

/// `ω²` on the Hopf curve written in the fixed-point data,
/// `(G'0 (λ G0 - β F0) + α G0 (F'0 - λ)) / (α β (D1 + D2))` with `λ = ε̃/k`.
///
/// `b3/b1` does not depend on `v`, so this equals [`hopf_frequency`]² at any
/// speed. `None` when `D1 + D2 = 0`.
pub fn omega_squared_closed_form(spec: &ModelSpec, fp: &FixedPoint) -> Option<f64> {
    let (f, g) = (spec.prey_birth(), spec.predator_death());
    let (f0, df0) = (f.value(fp.n0), f.derivative(fp.n0));
    let (g0, dg0) = (g.value(fp.p0), g.derivative(fp.p0));
    let (alpha, beta, lam) = (spec.alpha(), spec.beta(), spec.logistic());
    let den = alpha * beta * (spec.d1() + spec.d2());
    (den != 0.0).then(|| (dg0 * (lam * g0 - beta * f0) + alpha * g0 * (df0 - lam)) / den)
}

/// Roots of the characteristic quartic and its discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSet {
    /// Sorted by real part, then imaginary part.
    pub roots: [Complex64; 4],
    /// `Π_{i<j} (λi - λj)²`
    pub discriminant: f64,
}

impl EigenSet {
    pub fn max_real_part(&self) -> f64 {
        self.roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Roots whose imaginary part is below `tol·max(1, |λ|)`.
    pub fn real_roots(&self, tol: f64) -> Vec<f64> {
        self.roots.iter().filter(|z| z.im.abs() <= tol * z.norm().max(1.0)).map(|z| z.re).collect()
    }
}

fn sort_complex(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Companion-matrix roots of the characteristic quartic, Newton-polished.
pub fn quartic_roots(b: &CharCoeffs) -> EigenSet {
    let poly = b.polynomial();
    let dpoly = poly.derivative();
    let mut found = poly.roots();
    for z in &mut found {
        for _ in 0..3 {
            let d = dpoly.eval_complex(*z);
            if d.norm() == 0.0 {
                break;
            }
            let step = poly.eval_complex(*z) / d;
            let next = *z - step;
            if !(next.re.is_finite() && next.im.is_finite()) || poly.eval_complex(next).norm() >= poly.eval_complex(*z).norm() {
                break;
            }
            *z = next;
        }
    }
    sort_complex(&mut found);
    let mut roots = [Complex64::new(0.0, 0.0); 4];
    roots.copy_from_slice(&found[..4]);
    let mut disc = Complex64::new(1.0, 0.0);
    for i in 0..4 {
        for j in i + 1..4 {
            let d = roots[i] - roots[j];
            disc *= d * d;
        }
    }
    EigenSet { roots, discriminant: disc.re }
}

fn jacobian_eigenvalues(spec: &ModelSpec, fp: &FixedPoint, v: f64) -> Result<Vec<Complex64>, StabilityError> {
    Ok(spec.jacobian_at(v, fp)?.complex_eigenvalues().iter().copied().collect())
}

/// Eigenvalues of the Jacobian at `fp` for speed `v`.
pub fn eigenvalues_at(spec: &ModelSpec, fp: &FixedPoint, v: f64) -> Result<[Complex64; 4], StabilityError> {
    let mut ev = jacobian_eigenvalues(spec, fp, v)?;
    sort_complex(&mut ev);
    let mut out = [Complex64::new(0.0, 0.0); 4];
    out.copy_from_slice(&ev);
    Ok(out)
}

/// `d Re λ / dv` at the critical speed `v0` for the eigenvalue crossing the
/// imaginary axis with positive imaginary part.
///
/// The crossing eigenvalue is tracked to `v0 ± δ`, `δ = 1e-5 max(1, |v0|)`, by
/// nearest-neighbour matching, and the rate is the centred difference of its
/// real part. In terms of `μ = 1/v - 1/v0` the rate is multiplied by `-v0²`.
pub fn transversality(spec: &ModelSpec, fp: &FixedPoint, v0: f64) -> Result<f64, StabilityError> {
    if v0 == 0.0 {
        return Err(StabilityError::ZeroCriticalSpeed);
    }
    let at = jacobian_eigenvalues(spec, fp, v0)?;
    let target = at
        .iter()
        .filter(|z| z.im > 1e-9 * z.norm().max(1.0) && z.re.abs() <= 1e-4 * z.norm().max(1.0))
        .min_by(|a, b| a.re.abs().total_cmp(&b.re.abs()))
        .copied()
        .ok_or(StabilityError::NoComplexPair { v0 })?;
    let delta = 1e-5 * v0.abs().max(1.0);
    let nearest = |v: f64| -> Result<Complex64, StabilityError> {
        let ev = jacobian_eigenvalues(spec, fp, v)?;
        Ok(ev.into_iter().min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm())).unwrap())
    };
    let hi = nearest(v0 + delta)?;
    let lo = nearest(v0 - delta)?;
    Ok((hi.re - lo.re) / (2.0 * delta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeKind {
    Contracting,
    Conservative,
    Dilatory,
}

/// Logarithmic rate of change of phase-space volume, `Tr J = -b1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeRate {
    pub rate: f64,
    pub kind: VolumeKind,
}

pub fn volume_rate(b1: f64) -> VolumeRate {
    let rate = -b1;
    let kind = if rate < 0.0 {
        VolumeKind::Contracting
    } else if rate > 0.0 {
        VolumeKind::Dilatory
    } else {
        VolumeKind::Conservative
    };
    VolumeRate { rate: rate + 0.0, kind }
}

/// Everything the linearization says at one wave speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedReport {
    pub v: f64,
    pub coeffs: CharCoeffs,
    pub routh_hurwitz: RouthHurwitzReport,
    pub volume: VolumeRate,
    pub max_real_part: f64,
}

pub fn analyze_speed(spec: &ModelSpec, fp: &FixedPoint, v: f64) -> Result<SpeedReport, StabilityError> {
    let coeffs = coeffs_at(spec, fp, v)?;
    let max_real_part = eigenvalues_at(spec, fp, v)?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(SpeedReport {
        v,
        coeffs,
        routh_hurwitz: routh_hurwitz(&coeffs),
        volume: volume_rate(coeffs.b1),
        max_real_part,
    })
}

/// Hopf-curve summary for one fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfAnalysis {
    pub a: f64,
    pub b: f64,
    pub v_minus: Option<f64>,
    pub v_plus: Option<f64>,
    /// `√(b3/b1)` at `v+`, when positive.
    pub omega: Option<f64>,
    /// `√` of [`omega_squared_closed_form`], when positive.
    pub omega_closed_form: Option<f64>,
    /// Set when `v∓ = 0` and the quartic at `v = 0` is `λ⁴ + b4`, `b4 < 0`.
    pub degenerate: Option<DegenerateFrequency>,
    pub regime: Regime,
    /// `d Re λ / dv` at `v+`.
    pub transversality_rate: Option<f64>,
    pub transversality_sign: Option<i8>,
}

pub fn analyze_hopf(spec: &ModelSpec, fp: &FixedPoint) -> Result<HopfAnalysis, StabilityError> {
    let curve = hopf_curve(spec, fp)?;
    let speeds = critical_speeds(&curve);
    let mut omega = None;
    let mut degenerate = None;
    let mut transversality_rate = None;
    match speeds {
        Some(s) if s.is_degenerate() => degenerate = degenerate_frequency(&coeffs_at(spec, fp, 0.0)?),
        Some(s) => {
            omega = hopf_frequency(&coeffs_at(spec, fp, s.v_plus)?).ok();
            transversality_rate = transversality(spec, fp, s.v_plus).ok();
        }
        None => {}
    }
    let omega_closed_form = omega_squared_closed_form(spec, fp).filter(|w2| *w2 > 0.0).map(f64::sqrt);
    Ok(HopfAnalysis {
        a: curve.a,
        b: curve.b,
        v_minus: speeds.map(|s| s.v_minus),
        v_plus: speeds.map(|s| s.v_plus),
        omega,
        omega_closed_form,
        degenerate,
        regime: classify_regime(&curve),
        transversality_rate,
        transversality_sign: transversality_rate.map(|r| if r > 0.0 { 1 } else if r < 0.0 { -1 } else { 0 }),
    })
}
