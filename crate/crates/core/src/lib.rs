//! Traveling-wave analysis of two-species reaction-diffusion models.
//!
//! The crate covers the whole pipeline for the four-mode ODE obtained from the
//! traveling-wave substitution `ζ = x - v t`:
//!
//! * [`model`]: the ODE, preset nonlinearities A–E, fixed points, Jacobians.
//! * [`stability`]: characteristic coefficients, Routh–Hurwitz tests, the Hopf
//!   curve in the wave speed `v`, critical speeds and transversality.
//! * [`integrate`]: adaptive Dormand–Prince integration with blow-up
//!   detection and oscillation classification.
//! * [`diagnostics`]: Welch PSD, autocorrelation, spectral flatness and the
//!   cluster fractal dimension.
//!
//! ```
//! use wavetrain_core::model::{fixed_points, make_preset, SystemId};
//! use wavetrain_core::stability::analyze_hopf;
//!
//! let spec = make_preset(SystemId::B, &[]).unwrap();
//! let fp = fixed_points(&spec).unwrap()[0];
//! let hopf = analyze_hopf(&spec, &fp).unwrap();
//! assert!((hopf.v_plus.unwrap() - 2.0).abs() < 1e-9);
//! ```

pub mod diagnostics;
pub mod error;
pub mod integrate;
pub mod io;
pub mod model;
pub mod poly;
pub mod report;
pub mod stability;

pub use error::Error;
pub use integrate::{IntegrationOptions, Trajectory};
pub use model::{FixedPoint, ModelSpec, Param, PhaseState, SystemId};
pub use nalgebra::Matrix4;
pub use num_complex::Complex64;
pub use stability::{CharCoeffs, HopfAnalysis};
