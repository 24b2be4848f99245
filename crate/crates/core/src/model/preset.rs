//! The five preset models.
//!
//! | id | F(N)                 | G(P)           | ε̃ |
//! |----|----------------------|----------------|----|
//! | A  | ε                    | γ              | 0  |
//! | B  | ε                    | γ              | ε  |
//! | C  | k0                   | d + c P        | ε  |
//! | D  | k0 (1 + N / k)       | d + c P        | ε  |
//! | E  | (1 + δ N) / (1 + N²) | γ (1 + k P²)   | 0  |
//!
//! For D the `N F(N)` term contributes `-k0 N²/k`, so the effective logistic
//! coefficient is `(ε - k0)/k`: D is C with `ε → ε - k0`.

use std::sync::Arc;

use super::{ModelSpec, Param, Params, Rational, RateFunction, SystemId};
use crate::error::ModelError;
use crate::poly::Polynomial;

/// Free parameters of a preset with their default values.
pub fn preset_parameters(system: SystemId) -> &'static [(Param, f64)] {
    use Param::*;
    match system {
        SystemId::A => &[(Alpha, 1.5), (Beta, -2.75), (Eps, 1.0), (Gamma, -1.5), (D1, 1.25), (D2, 2.1)],
        SystemId::B => &[
            (Alpha, -1.2),
            (Beta, -2.0),
            (Eps, -3.0),
            (K, 2.0),
            (Gamma, -2.0),
            (D1, 1.0),
            (D2, 2.0),
        ],
        // C has no published parameter set; it shares D's.
        SystemId::C | SystemId::D => &[
            (Alpha, 1.25),
            (Beta, 2.0),
            (Eps, 1.0),
            (K, 2.0),
            (C, 0.5),
            (D, 2.0),
            (K0, 2.0),
            (D1, 1.0),
            (D2, -2.0),
        ],
        SystemId::E => &[
            (Alpha, 1.7),
            (Beta, -2.1),
            (K, -2.0),
            (Gamma, -2.0),
            (Delta, 0.6),
            (D1, -1.0),
            (D2, 2.0),
        ],
    }
}

/// Builds a preset model, installing defaults and then `overrides`.
///
/// Overrides must name free parameters of the preset. `eps_tilde` is never
/// free: it is zero for A and E and tied to `eps` for B, C and D.
pub fn make_preset(system: SystemId, overrides: &[(Param, f64)]) -> Result<ModelSpec, ModelError> {
    let defaults = preset_parameters(system);
    let mut params = Params::new();
    for &(p, v) in defaults {
        params.set(p, v);
    }
    for &(p, v) in overrides {
        if p == Param::EpsTilde {
            return Err(ModelError::FixedByPreset { param: p, system });
        }
        if !defaults.iter().any(|(q, _)| *q == p) {
            return Err(ModelError::NotApplicable { param: p, system });
        }
        params.set(p, v);
    }

    let get = |p: Param| params.get(p);
    let (f, g, eps_tilde): (Rational, Rational, f64) = match system {
        SystemId::A => (Rational::constant(get(Param::Eps)?), Rational::constant(get(Param::Gamma)?), 0.0),
        SystemId::B => {
            let eps = get(Param::Eps)?;
            (Rational::constant(eps), Rational::constant(get(Param::Gamma)?), eps)
        }
        SystemId::C => (
            Rational::constant(get(Param::K0)?),
            Rational::polynomial(Polynomial::new(vec![get(Param::D)?, get(Param::C)?])),
            get(Param::Eps)?,
        ),
        SystemId::D => {
            let (k0, k) = (get(Param::K0)?, get(Param::K)?);
            if k == 0.0 {
                return Err(ModelError::InvalidParameter { param: Param::K, reason: "must be nonzero" });
            }
            (
                Rational::polynomial(Polynomial::new(vec![k0, k0 / k])),
                Rational::polynomial(Polynomial::new(vec![get(Param::D)?, get(Param::C)?])),
                get(Param::Eps)?,
            )
        }
        SystemId::E => {
            let (gamma, k) = (get(Param::Gamma)?, get(Param::K)?);
            (
                Rational::new(
                    Polynomial::new(vec![1.0, get(Param::Delta)?]),
                    Polynomial::new(vec![1.0, 0.0, 1.0]),
                ),
                Rational::polynomial(Polynomial::new(vec![gamma, 0.0, gamma * k])),
                0.0,
            )
        }
    };
    params.set(Param::EpsTilde, eps_tilde);
    let f: Arc<dyn RateFunction> = Arc::new(f);
    let g: Arc<dyn RateFunction> = Arc::new(g);
    ModelSpec::build(Some(system), f, g, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_a_defaults() {
        let s = make_preset(SystemId::A, &[]).unwrap();
        assert_eq!(s.prey_birth().value(0.3), 1.0);
        assert_eq!(s.predator_death().value(0.3), -1.5);
        assert_eq!(s.eps_tilde(), 0.0);
        assert_eq!(s.alpha(), 1.5);
        assert_eq!(s.beta(), -2.75);
        assert_eq!((s.d1(), s.d2()), (1.25, 2.1));
        assert_eq!(s.param(Param::K), Err(ModelError::AbsentParameter(Param::K)));
    }

    #[test]
    fn system_b_defaults() {
        let s = make_preset(SystemId::B, &[]).unwrap();
        assert_eq!(s.prey_birth().value(7.0), -3.0);
        assert_eq!(s.predator_death().value(7.0), -2.0);
        assert_eq!(s.eps_tilde(), -3.0);
        assert_eq!((s.alpha(), s.beta(), s.param(Param::K).unwrap()), (-1.2, -2.0, 2.0));
        assert_eq!((s.d1(), s.d2()), (1.0, 2.0));
    }

    #[test]
    fn system_e_override() {
        let s = make_preset(SystemId::E, &[(Param::Alpha, 1.7)]).unwrap();
        let n = 0.4;
        assert!((s.prey_birth().value(n) - (1.0 + 0.6 * n) / (1.0 + n * n)).abs() < 1e-15);
        let p = 0.8;
        assert!((s.predator_death().value(p) - (-2.0) * (1.0 - 2.0 * p * p)).abs() < 1e-15);
        assert_eq!(s.eps_tilde(), 0.0);
        assert_eq!(s.alpha(), 1.7);
        assert_eq!(s.param(Param::Eps), Err(ModelError::AbsentParameter(Param::Eps)));
    }

    #[test]
    fn system_d_logistic_structure() {
        let s = make_preset(SystemId::D, &[]).unwrap();
        // -N F(N) + ε N²/k = -k0 N + (ε - k0) N²/k
        let n = 1.7;
        let direct = -n * s.prey_birth().value(n) + s.logistic() * n * n;
        let (eps, k, k0) = (1.0, 2.0, 2.0);
        assert!((direct - (-k0 * n + (eps - k0) * n * n / k)).abs() < 1e-14);
    }

    #[test]
    fn rejected_overrides() {
        assert_eq!(
            make_preset(SystemId::A, &[(Param::EpsTilde, 1.0)]).unwrap_err(),
            ModelError::FixedByPreset { param: Param::EpsTilde, system: SystemId::A }
        );
        assert_eq!(
            make_preset(SystemId::E, &[(Param::EpsTilde, 0.5)]).unwrap_err(),
            ModelError::FixedByPreset { param: Param::EpsTilde, system: SystemId::E }
        );
        assert_eq!(
            make_preset(SystemId::C, &[(Param::Gamma, 1.0)]).unwrap_err(),
            ModelError::NotApplicable { param: Param::Gamma, system: SystemId::C }
        );
        assert!(make_preset(SystemId::B, &[(Param::D2, 0.0)]).is_err());
        assert!(make_preset(SystemId::B, &[(Param::K, 0.0)]).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for id in SystemId::ALL {
            let s = make_preset(id, &[]).unwrap();
            for i in 0..10 {
                let x = -1.3 + 0.37 * i as f64;
                let h = 1e-5;
                for f in [s.prey_birth(), s.predator_death()] {
                    let fd = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
                    let an = f.derivative(x);
                    assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "{id} x={x}: {fd} vs {an}");
                }
            }
        }
    }
}
