//! Dense real polynomials and companion-matrix root finding.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Real polynomial with coefficients in ascending order of degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients `c0 + c1 x + ...`.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut p = Self { coeffs: coeffs.into() };
        p.trim();
        p
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::new(vec![0.0, 1.0])
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if *c == 0.0) {
            self.coeffs.pop();
        }
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect::<Vec<_>>(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect::<Vec<_>>())
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(1.0), |acc, _| &acc * self)
    }

    /// All complex roots, found as eigenvalues of the companion matrix.
    ///
    /// Leading coefficients that are negligible relative to the largest one
    /// are dropped first so that a cancelled top term does not produce roots
    /// at infinity.
    pub fn roots(&self) -> Vec<Complex64> {
        let scale = self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        let mut coeffs = self.coeffs.clone();
        while matches!(coeffs.last(), Some(c) if c.abs() <= 1e-14 * scale) {
            coeffs.pop();
        }
        let n = match coeffs.len() {
            0 | 1 => return Vec::new(),
            len => len - 1,
        };
        let lead = coeffs[n];
        if n == 1 {
            return vec![Complex64::new(-coeffs[0] / lead, 0.0)];
        }
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            companion[(i, n - 1)] = -coeffs[i] / lead;
        }
        companion.complex_eigenvalues().iter().copied().collect()
    }

    /// Real roots: companion-matrix roots whose imaginary part is below
    /// `imag_tol`, each polished by a few Newton steps, sorted ascending.
    pub fn real_roots(&self, imag_tol: f64) -> Vec<f64> {
        let deriv = self.derivative();
        let mut out: Vec<f64> = self
            .roots()
            .into_iter()
            .filter(|z| z.im.abs() < imag_tol)
            .map(|z| {
                let mut x = z.re;
                for _ in 0..4 {
                    let d = deriv.eval(x);
                    if d == 0.0 {
                        break;
                    }
                    let step = self.eval(x) / d;
                    if !step.is_finite() {
                        break;
                    }
                    x -= step;
                }
                x
            })
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let c: Vec<f64> = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + rhs.coeffs.get(i).unwrap_or(&0.0))
            .collect();
        Polynomial::new(c)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut c = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Polynomial::new(c)
    }
}
