#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wavetrain_core::model::{fixed_points, make_preset, preset_parameters, FixedPoint, ModelSpec, Param, SystemId};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The physical fixed point when there is one, else the first.
pub fn preset_fp(id: SystemId) -> (ModelSpec, FixedPoint) {
    let spec = make_preset(id, &[]).unwrap();
    let fp = select(&spec).unwrap();
    (spec, fp)
}

pub fn select(spec: &ModelSpec) -> Option<FixedPoint> {
    let fps = fixed_points(spec).unwrap();
    fps.iter().find(|fp| fp.is_physical()).or(fps.first()).copied()
}

/// Preset with every free parameter scaled by a factor in [0.7, 1.3].
pub fn perturbed_preset(id: SystemId, rng: &mut impl Rng) -> ModelSpec {
    let overrides: Vec<(Param, f64)> =
        preset_parameters(id).iter().map(|&(p, v)| (p, v * rng.random_range(0.7..1.3))).collect();
    make_preset(id, &overrides).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
