//! The traveling-wave ODE system.
//!
//! Substituting `N(x, t) = N(ζ)`, `P(x, t) = P(ζ)` with `ζ = x - v t` into the
//! two-species reaction–diffusion model gives the four-mode system
//!
//! ```text
//! N' = M
//! M' = (-v M - N F(N) + α N P + ε̃ N² / k) / D1
//! P' = Q
//! Q' = (-v Q + P G(P) - β N P) / D2
//! ```
//!
//! where `F` is the prey birth-rate function and `G` the predator death-rate
//! function. [`ModelSpec`] bundles `F`, `G` and the scalar parameters; the five
//! preset choices live in [`preset`].

mod config;
mod fixed_point;
mod preset;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::poly::Polynomial;

pub use config::ModelConfig;
pub use fixed_point::{fixed_points, fixed_points_by_elimination, FixedPoint, FIXED_POINT_RESIDUAL};
pub use preset::{make_preset, preset_parameters};

/// The five preset nonlinearity choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SystemId {
    A,
    B,
    C,
    D,
    E,
}

impl SystemId {
    pub const ALL: [SystemId; 5] = [SystemId::A, SystemId::B, SystemId::C, SystemId::D, SystemId::E];
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SystemId::A => "A",
            SystemId::B => "B",
            SystemId::C => "C",
            SystemId::D => "D",
            SystemId::E => "E",
        };
        f.write_str(s)
    }
}

impl FromStr for SystemId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(SystemId::A),
            "B" | "b" => Ok(SystemId::B),
            "C" | "c" => Ok(SystemId::C),
            "D" | "d" => Ok(SystemId::D),
            "E" | "e" => Ok(SystemId::E),
            other => Err(ModelError::UnknownSystem(other.to_string())),
        }
    }
}

/// Scalar model parameters. The config key of each is [`Param::key`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    Alpha,
    Beta,
    EpsTilde,
    Eps,
    K,
    Gamma,
    Delta,
    C,
    D,
    K0,
    D1,
    D2,
}

impl Param {
    pub const ALL: [Param; 12] = [
        Param::Alpha,
        Param::Beta,
        Param::EpsTilde,
        Param::Eps,
        Param::K,
        Param::Gamma,
        Param::Delta,
        Param::C,
        Param::D,
        Param::K0,
        Param::D1,
        Param::D2,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Param::Alpha => "alpha",
            Param::Beta => "beta",
            Param::EpsTilde => "eps_tilde",
            Param::Eps => "eps",
            Param::K => "k",
            Param::Gamma => "gamma",
            Param::Delta => "delta",
            Param::C => "c",
            Param::D => "d",
            Param::K0 => "k0",
            Param::D1 => "D1",
            Param::D2 => "D2",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Param {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Param::ALL
            .into_iter()
            .find(|p| p.key() == s)
            .ok_or_else(|| ModelError::UnknownParameter(s.to_string()))
    }
}

/// Parameter table where entries a model does not use are absent.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Params {
    values: [Option<f64>; 12],
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, param: Param, value: f64) -> Self {
        self.set(param, value);
        self
    }

    pub fn set(&mut self, param: Param, value: f64) {
        self.values[param.index()] = Some(value);
    }

    pub fn get(&self, param: Param) -> Result<f64, ModelError> {
        self.values[param.index()].ok_or(ModelError::AbsentParameter(param))
    }

    pub fn is_present(&self, param: Param) -> bool {
        self.values[param.index()].is_some()
    }

    /// Present entries in [`Param::ALL`] order.
    pub fn iter(&self) -> impl Iterator<Item = (Param, f64)> + '_ {
        Param::ALL
            .into_iter()
            .filter_map(|p| self.values[p.index()].map(|v| (p, v)))
    }
}

/// A rate function of one population with its analytic derivative.
pub trait RateFunction: fmt::Debug + Send + Sync {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;

    /// Exact rational form, when one exists. Fixed points are found by
    /// polynomial elimination only for rational `F` and `G`.
    fn as_rational(&self) -> Option<&Rational> {
        None
    }
}

/// `numerator(x) / denominator(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rational {
    pub numerator: Polynomial,
    pub denominator: Polynomial,
}

impl Rational {
    pub fn new(numerator: Polynomial, denominator: Polynomial) -> Self {
        Self { numerator, denominator }
    }

    pub fn polynomial(p: Polynomial) -> Self {
        Self::new(p, Polynomial::constant(1.0))
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(Polynomial::constant(c))
    }
}

impl RateFunction for Rational {
    fn value(&self, x: f64) -> f64 {
        self.numerator.eval(x) / self.denominator.eval(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        let n = self.numerator.eval(x);
        let d = self.denominator.eval(x);
        let dn = self.numerator.derivative().eval(x);
        let dd = self.denominator.derivative().eval(x);
        (dn * d - n * dd) / (d * d)
    }

    fn as_rational(&self) -> Option<&Rational> {
        Some(self)
    }
}

/// Which of the four state components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    N,
    M,
    P,
    Q,
}

impl Component {
    pub fn index(self) -> usize {
        match self {
            Component::N => 0,
            Component::M => 1,
            Component::P => 2,
            Component::Q => 3,
        }
    }
}

impl FromStr for Component {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "N" => Ok(Component::N),
            "M" => Ok(Component::M),
            "P" => Ok(Component::P),
            "Q" => Ok(Component::Q),
            other => Err(ModelError::Config(format!("unknown component `{other}`"))),
        }
    }
}

/// `(N, M, P, Q)` at one value of ζ.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseState {
    pub n: f64,
    pub m: f64,
    pub p: f64,
    pub q: f64,
}

impl PhaseState {
    pub const fn new(n: f64, m: f64, p: f64, q: f64) -> Self {
        Self { n, m, p, q }
    }

    pub const fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub const fn to_array(self) -> [f64; 4] {
        [self.n, self.m, self.p, self.q]
    }

    pub fn get(&self, c: Component) -> f64 {
        self.to_array()[c.index()]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    pub fn max_norm(&self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn distance(&self, other: &PhaseState) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// A complete model: rate functions plus scalar parameters.
///
/// Immutable after construction; clones share the rate functions.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    system: Option<SystemId>,
    prey_birth: Arc<dyn RateFunction>,
    predator_death: Arc<dyn RateFunction>,
    params: Params,
    alpha: f64,
    beta: f64,
    eps_tilde: f64,
    // ε̃ / k, zero when there is no logistic term
    logistic: f64,
    d1: f64,
    d2: f64,
}

impl ModelSpec {
    /// Builds a model from arbitrary rate functions.
    ///
    /// `alpha`, `beta`, `D1` and `D2` are required and nonzero. `eps_tilde`
    /// defaults to zero; when it is nonzero `k` is required and nonzero.
    pub fn new(
        prey_birth: Arc<dyn RateFunction>,
        predator_death: Arc<dyn RateFunction>,
        params: Params,
    ) -> Result<Self, ModelError> {
        Self::build(None, prey_birth, predator_death, params)
    }

    pub(crate) fn build(
        system: Option<SystemId>,
        prey_birth: Arc<dyn RateFunction>,
        predator_death: Arc<dyn RateFunction>,
        params: Params,
    ) -> Result<Self, ModelError> {
        let nonzero = |p: Param| -> Result<f64, ModelError> {
            let v = params.get(p)?;
            if !v.is_finite() {
                Err(ModelError::InvalidParameter { param: p, reason: "must be finite" })
            } else if v == 0.0 {
                Err(ModelError::InvalidParameter { param: p, reason: "must be nonzero" })
            } else {
                Ok(v)
            }
        };
        let alpha = nonzero(Param::Alpha)?;
        let beta = nonzero(Param::Beta)?;
        let d1 = nonzero(Param::D1)?;
        let d2 = nonzero(Param::D2)?;
        let eps_tilde = params.get(Param::EpsTilde).unwrap_or(0.0);
        let logistic = if eps_tilde == 0.0 { 0.0 } else { eps_tilde / nonzero(Param::K)? };
        if let Some((param, _)) = params.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ModelError::InvalidParameter { param, reason: "must be finite" });
        }
        Ok(Self {
            system,
            prey_birth,
            predator_death,
            params,
            alpha,
            beta,
            eps_tilde,
            logistic,
            d1,
            d2,
        })
    }

    /// The preset this model was built from, if any.
    pub fn system(&self) -> Option<SystemId> {
        self.system
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Reads a parameter; absent parameters are an error.
    pub fn param(&self, p: Param) -> Result<f64, ModelError> {
        self.params.get(p)
    }

    pub fn prey_birth(&self) -> &dyn RateFunction {
        self.prey_birth.as_ref()
    }

    pub fn predator_death(&self) -> &dyn RateFunction {
        self.predator_death.as_ref()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eps_tilde(&self) -> f64 {
        self.eps_tilde
    }

    /// `ε̃ / k`, the logistic coefficient.
    pub fn logistic(&self) -> f64 {
        self.logistic
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn d2(&self) -> f64 {
        self.d2
    }

    /// Right-hand side on a raw array. No finiteness check.
    #[inline]
    pub fn rhs_array(&self, v: f64, s: &[f64; 4]) -> [f64; 4] {
        let [n, m, p, q] = *s;
        [
            m,
            (-v * m - n * self.prey_birth.value(n) + self.alpha * n * p + self.logistic * n * n) / self.d1,
            q,
            (-v * q + p * self.predator_death.value(p) - self.beta * n * p) / self.d2,
        ]
    }

    /// d/dζ of `s` at wave speed `v`.
    pub fn evaluate_rhs(&self, v: f64, s: &PhaseState) -> Result<PhaseState, ModelError> {
        let out = PhaseState::from_array(self.rhs_array(v, &s.to_array()));
        if out.is_finite() {
            Ok(out)
        } else {
            Err(ModelError::NonFinite)
        }
    }

    /// Jacobian of the right-hand side at an arbitrary state, rows and
    /// columns ordered `(N, M, P, Q)`.
    pub fn rhs_jacobian(&self, v: f64, s: &PhaseState) -> Matrix4<f64> {
        let (n, p) = (s.n, s.p);
        let f = &self.prey_birth;
        let g = &self.predator_death;
        let j21 = (self.alpha * p + 2.0 * self.logistic * n - f.value(n) - n * f.derivative(n)) / self.d1;
        let j43 = (-self.beta * n + g.value(p) + p * g.derivative(p)) / self.d2;
        #[rustfmt::skip]
        let j = Matrix4::new(
            0.0, 1.0, 0.0, 0.0,
            j21, -v / self.d1, self.alpha * n / self.d1, 0.0,
            0.0, 0.0, 0.0, 1.0,
            -self.beta * p / self.d2, 0.0, j43, -v / self.d2,
        );
        j
    }

    /// Jacobian at a fixed point.
    pub fn jacobian_at(&self, v: f64, fp: &FixedPoint) -> Result<Matrix4<f64>, ModelError> {
        if !(fp.residual < 1e-6) {
            return Err(ModelError::NotAFixedPoint { residual: fp.residual });
        }
        Ok(self.rhs_jacobian(v, &fp.state()))
    }
}

/// Free-function form of [`ModelSpec::evaluate_rhs`].
pub fn evaluate_rhs(spec: &ModelSpec, v: f64, s: &PhaseState) -> Result<PhaseState, ModelError> {
    spec.evaluate_rhs(v, s)
}

/// Free-function form of [`ModelSpec::jacobian_at`].
pub fn jacobian_at(spec: &ModelSpec, v: f64, fp: &FixedPoint) -> Result<Matrix4<f64>, ModelError> {
    spec.jacobian_at(v, fp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_jacobian(spec: &ModelSpec, v: f64, s: &PhaseState, h: f64) -> Matrix4<f64> {
        let mut j = Matrix4::zeros();
        for col in 0..4 {
            let mut hi = s.to_array();
            let mut lo = s.to_array();
            hi[col] += h;
            lo[col] -= h;
            let fh = spec.rhs_array(v, &hi);
            let fl = spec.rhs_array(v, &lo);
            for row in 0..4 {
                j[(row, col)] = (fh[row] - fl[row]) / (2.0 * h);
            }
        }
        j
    }

    #[test]
    fn system_b_fixed_point_annihilates_rhs() {
        let spec = make_preset(SystemId::B, &[]).unwrap();
        let d = spec.evaluate_rhs(2.0, &PhaseState::new(1.0, 0.0, 1.25, 0.0)).unwrap();
        assert_eq!(d.to_array(), [0.0; 4]);
    }

    #[test]
    fn system_a_rounded_fixed_point() {
        let spec = make_preset(SystemId::A, &[]).unwrap();
        let d = spec.evaluate_rhs(0.1, &PhaseState::new(6.0 / 11.0, 0.0, 2.0 / 3.0, 0.0)).unwrap();
        assert!(d.max_norm() < 1e-9, "{d:?}");
    }

    #[test]
    fn unit_m_perturbation_at_fixed_point() {
        for id in SystemId::ALL {
            let spec = make_preset(id, &[]).unwrap();
            let v = 0.7;
            for fp in fixed_points(&spec).unwrap() {
                let d = spec.evaluate_rhs(v, &PhaseState::new(fp.n0, 1.0, fp.p0, 0.0)).unwrap();
                assert_eq!(d.n, 1.0);
                assert!((d.m + v / spec.d1()).abs() < 1e-9, "{id}: {}", d.m);
            }
        }
    }

    #[test]
    fn overflow_is_reported() {
        let spec = make_preset(SystemId::E, &[]).unwrap();
        let err = spec.evaluate_rhs(1.0, &PhaseState::new(0.1, 0.0, 1e200, 0.0));
        assert_eq!(err, Err(ModelError::NonFinite));
    }

    #[test]
    fn jacobian_structure_and_trace() {
        for id in SystemId::ALL {
            let spec = make_preset(id, &[]).unwrap();
            let v = 1.3;
            for fp in fixed_points(&spec).unwrap() {
                let j = spec.jacobian_at(v, &fp).unwrap();
                assert_eq!(j[(0, 1)], 1.0);
                assert_eq!(j[(2, 3)], 1.0);
                for (r, c) in [(0, 0), (0, 2), (0, 3), (2, 0), (2, 1), (2, 2)] {
                    assert_eq!(j[(r, c)], 0.0);
                }
                let expected = -v * (spec.d1() + spec.d2()) / (spec.d1() * spec.d2());
                assert!((j.trace() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn system_b_jacobian_matches_finite_differences() {
        let spec = make_preset(SystemId::B, &[]).unwrap();
        let fp = &fixed_points(&spec).unwrap()[0];
        let j = spec.jacobian_at(2.0, fp).unwrap();
        let fd = fd_jacobian(&spec, 2.0, &fp.state(), 1e-6);
        assert!((j - fd).amax() < 1e-8, "{}", (j - fd).amax());
    }

    #[test]
    fn jacobian_rejects_non_fixed_point() {
        let spec = make_preset(SystemId::B, &[]).unwrap();
        let fp = FixedPoint::at(&spec, 2.0, 2.0);
        assert!(matches!(spec.jacobian_at(1.0, &fp), Err(ModelError::NotAFixedPoint { .. })));
    }

    #[test]
    fn rational_derivative() {
        let r = Rational::new(Polynomial::new(vec![1.0, 0.6]), Polynomial::new(vec![1.0, 0.0, 1.0]));
        let x = 0.4;
        let h = 1e-6;
        let fd = (r.value(x + h) - r.value(x - h)) / (2.0 * h);
        assert!((r.derivative(x) - fd).abs() < 1e-9);
    }

    #[test]
    fn custom_model_requires_core_parameters() {
        let f: Arc<dyn RateFunction> = Arc::new(Rational::constant(1.0));
        let g: Arc<dyn RateFunction> = Arc::new(Rational::constant(1.0));
        let params = Params::new().with(Param::Alpha, 1.0).with(Param::Beta, 1.0).with(Param::D1, 1.0);
        assert_eq!(
            ModelSpec::new(f.clone(), g.clone(), params).unwrap_err(),
            ModelError::AbsentParameter(Param::D2)
        );
        let params = params.with(Param::D2, 1.0).with(Param::EpsTilde, 1.0);
        assert_eq!(
            ModelSpec::new(f.clone(), g.clone(), params).unwrap_err(),
            ModelError::AbsentParameter(Param::K)
        );
        let params = params.with(Param::K, 0.0);
        assert!(matches!(
            ModelSpec::new(f, g, params),
            Err(ModelError::InvalidParameter { param: Param::K, .. })
        ));
    }

    #[test]
    fn parsing() {
        assert_eq!("d".parse::<SystemId>().unwrap(), SystemId::D);
        assert!("F".parse::<SystemId>().is_err());
        assert_eq!("D1".parse::<Param>().unwrap(), Param::D1);
        for p in Param::ALL {
            assert_eq!(p.key().parse::<Param>().unwrap(), p);
        }
    }
}
