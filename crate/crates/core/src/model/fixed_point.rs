//! Equilibria `(N0, 0, P0, 0)` with `N0 = G(P0)/β` and
//! `P0 = (F(N0) - ε̃ N0/k)/α`.

use serde::{Deserialize, Serialize};

use super::{ModelSpec, Param, PhaseState, SystemId};
use crate::error::ModelError;
use crate::poly::Polynomial;

/// Largest right-hand-side max-norm accepted for a reported fixed point.
pub const FIXED_POINT_RESIDUAL: f64 = 1e-9;

/// Imaginary-part cutoff for accepting a polynomial root as real.
const REAL_ROOT_IMAG_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub n0: f64,
    pub m0: f64,
    pub p0: f64,
    pub q0: f64,
    /// Max-norm of the right-hand side at the point.
    pub residual: f64,
}

impl FixedPoint {
    /// Wraps `(n0, 0, p0, 0)` and records its residual. The residual does not
    /// depend on `v` because `M = Q = 0`.
    pub fn at(spec: &ModelSpec, n0: f64, p0: f64) -> Self {
        let state = PhaseState::new(n0, 0.0, p0, 0.0);
        let r = PhaseState::from_array(spec.rhs_array(0.0, &state.to_array()));
        let residual = if r.is_finite() { r.max_norm() } else { f64::INFINITY };
        Self { n0, m0: 0.0, p0, q0: 0.0, residual }
    }

    pub fn state(&self) -> PhaseState {
        PhaseState::new(self.n0, self.m0, self.p0, self.q0)
    }

    /// Both populations strictly positive.
    pub fn is_physical(&self) -> bool {
        self.n0 > 0.0 && self.p0 > 0.0
    }
}

/// All fixed points of `spec`, sorted by `N0`.
///
/// Presets A–D have a single closed-form equilibrium. Everything else goes
/// through [`fixed_points_by_elimination`]. An empty list means no real
/// equilibrium exists.
pub fn fixed_points(spec: &ModelSpec) -> Result<Vec<FixedPoint>, ModelError> {
    match spec.system() {
        Some(id @ (SystemId::A | SystemId::B | SystemId::C | SystemId::D)) => {
            Ok(closed_form(spec, id)?.into_iter().filter(|fp| fp.residual < FIXED_POINT_RESIDUAL).collect())
        }
        _ => fixed_points_by_elimination(spec),
    }
}

fn closed_form(spec: &ModelSpec, id: SystemId) -> Result<Option<FixedPoint>, ModelError> {
    let p = |x: Param| spec.param(x);
    let (alpha, beta) = (spec.alpha(), spec.beta());
    let point = match id {
        SystemId::A => Some((p(Param::Gamma)? / beta, p(Param::Eps)? / alpha)),
        SystemId::B => {
            let (gamma, eps, k) = (p(Param::Gamma)?, p(Param::Eps)?, p(Param::K)?);
            Some((gamma / beta, eps / alpha * (1.0 - gamma / (beta * k))))
        }
        SystemId::C | SystemId::D => {
            let (eps, k, c, d, k0) = (p(Param::Eps)?, p(Param::K)?, p(Param::C)?, p(Param::D)?, p(Param::K0)?);
            let eps = if id == SystemId::D { eps - k0 } else { eps };
            let den = eps * c + alpha * beta * k;
            (den != 0.0).then(|| (k * (alpha * d + c * k0) / den, (beta * k * k0 - eps * d) / den))
        }
        SystemId::E => unreachable!("System E has no closed-form equilibrium"),
    };
    Ok(point.map(|(n0, p0)| FixedPoint::at(spec, n0, p0)))
}

/// Fixed points by eliminating `P0`.
///
/// With `F = f/f̃` and `G = g/g̃` rational, `P0 = r(N0)/s(N0)` where
/// `r = f - (ε̃/k) N f̃` and `s = α f̃`. Substituting into `β N0 g̃(P0) = g(P0)`
/// and clearing `s^m`, `m = max(deg g, deg g̃)`, leaves a univariate
/// polynomial in `N0` (a quintic for System E). Its real roots are kept when
/// they back-substitute with residual below [`FIXED_POINT_RESIDUAL`].
pub fn fixed_points_by_elimination(spec: &ModelSpec) -> Result<Vec<FixedPoint>, ModelError> {
    let f = spec.prey_birth().as_rational().ok_or(ModelError::NotRational)?;
    let g = spec.predator_death().as_rational().ok_or(ModelError::NotRational)?;
    let x = Polynomial::x();
    let r = &f.numerator - &(&x * &f.denominator).scale(spec.logistic());
    let s = f.denominator.scale(spec.alpha());

    let m = g.numerator.degree().unwrap_or(0).max(g.denominator.degree().unwrap_or(0));
    // Σ c_i r^i s^(m-i)
    let homogenize = |p: &Polynomial| {
        p.coeffs().iter().enumerate().fold(Polynomial::zero(), |acc, (i, &c)| {
            let term = (&r.pow(i as u32) * &s.pow((m - i) as u32)).scale(c);
            &acc + &term
        })
    };
    let lhs = &(&x * &homogenize(&g.denominator)).scale(spec.beta());
    let poly = lhs - &homogenize(&g.numerator);

    let mut out: Vec<FixedPoint> = Vec::new();
    for n0 in poly.real_roots(REAL_ROOT_IMAG_TOL) {
        let p0 = (spec.prey_birth().value(n0) - spec.logistic() * n0) / spec.alpha();
        if !p0.is_finite() {
            continue;
        }
        let fp = FixedPoint::at(spec, n0, p0);
        if !(fp.residual < FIXED_POINT_RESIDUAL) {
            continue;
        }
        let duplicate = out
            .last()
            .is_some_and(|prev| (prev.n0 - n0).abs() <= 1e-9 * n0.abs().max(1.0));
        if !duplicate {
            out.push(fp);
        }
    }
    Ok(out)
}
