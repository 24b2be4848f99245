//! Adaptive integration of the traveling-wave ODE in ζ.
//!
//! Dormand–Prince 5(4) with the Hairer dense output, sampled on a uniform
//! grid. Trajectories whose max-norm exceeds a threshold stop with a
//! [`Termination::Blowup`] at the bracketed crossing point.

use serde::{Deserialize, Serialize};

use crate::error::IntegrateError;
use crate::model::{Component, FixedPoint, ModelSpec, PhaseState};

/// Perturbation added to a fixed point to form the default initial state.
pub const DEFAULT_PERTURBATION: PhaseState = PhaseState::new(1e-2, 0.0, 1e-2, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationOptions {
    pub zeta_span: (f64, f64),
    pub initial_state: PhaseState,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub blowup_threshold: f64,
    pub sample_interval: f64,
}

impl IntegrationOptions {
    /// Defaults: `rel_tol = 1e-9`, `abs_tol = 1e-11`, `max_step = 1`,
    /// `blowup_threshold = 1e6`, `sample_interval = 0.05`.
    pub fn new(zeta_span: (f64, f64), initial_state: PhaseState) -> Self {
        Self {
            zeta_span,
            initial_state,
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: 1.0,
            blowup_threshold: 1e6,
            sample_interval: 0.05,
        }
    }

    /// Starts from `fp` plus [`DEFAULT_PERTURBATION`].
    pub fn from_fixed_point(zeta_span: (f64, f64), fp: &FixedPoint) -> Self {
        Self::new(zeta_span, default_initial_state(fp))
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let (a, b) = self.zeta_span;
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(IntegrateError::InvalidOptions("zeta_span must be finite with end > start"));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(IntegrateError::InvalidOptions("tolerances must be positive"));
        }
        if !(self.max_step > 0.0) {
            return Err(IntegrateError::InvalidOptions("max_step must be positive"));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(IntegrateError::InvalidOptions("blowup_threshold must be positive"));
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            return Err(IntegrateError::InvalidOptions("sample_interval must be positive"));
        }
        if !self.initial_state.is_finite() {
            return Err(IntegrateError::InvalidOptions("initial state must be finite"));
        }
        Ok(())
    }
}

pub fn default_initial_state(fp: &FixedPoint) -> PhaseState {
    let s = fp.state();
    let d = DEFAULT_PERTURBATION;
    PhaseState::new(s.n + d.n, s.m + d.m, s.p + d.p, s.q + d.q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Termination {
    Completed,
    /// The max-norm crossed the threshold at `zeta`.
    Blowup { zeta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `zeta_start + i·sample_interval`
    pub zetas: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub termination: Termination,
    pub stats: StepStats,
    pub sample_interval: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_blowup(&self) -> bool {
        matches!(self.termination, Termination::Blowup { .. })
    }

    pub fn last(&self) -> Option<&PhaseState> {
        self.states.last()
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// 5th minus 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

type State = [f64; 4];

fn axpy(y: &State, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..4 {
            out[i] += c * k[i];
        }
    }
    out
}

fn max_norm(y: &State) -> f64 {
    y.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Fourth-order interpolant over one accepted step.
struct Dense {
    t0: f64,
    h: f64,
    r: [State; 5],
}

impl Dense {
    fn eval(&self, theta: f64) -> State {
        let t1 = 1.0 - theta;
        let mut y = [0.0; 4];
        for i in 0..4 {
            let r = |j: usize| self.r[j][i];
            y[i] = r(0) + theta * (r(1) + t1 * (r(2) + theta * (r(3) + t1 * r(4))));
        }
        y
    }

    fn at(&self, t: f64) -> State {
        self.eval((t - self.t0) / self.h)
    }
}

fn rms_error(err: &State, y0: &State, y1: &State, rtol: f64, atol: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / 4.0).sqrt()
}

fn initial_step<F: FnMut(f64, &State) -> State>(rhs: &mut F, t0: f64, y0: &State, f0: &State, opts: &IntegrationOptions) -> f64 {
    let sc: Vec<f64> = y0.iter().map(|y| opts.abs_tol + opts.rel_tol * y.abs()).collect();
    let norm = |v: &State| (v.iter().zip(&sc).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / 4.0).sqrt();
    let (d0, d1) = (norm(y0), norm(f0));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y0, &[(h0, f0)]);
    let f1 = rhs(t0 + h0, &y1);
    let diff = [f1[0] - f0[0], f1[1] - f0[1], f1[2] - f0[2], f1[3] - f0[3]];
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    let h = (100.0 * h0).min(h1).min(opts.max_step);
    if h.is_finite() && h > 0.0 {
        h
    } else {
        opts.max_step.min(1e-3)
    }
}

/// Integrates `y' = rhs(ζ, y)` for an arbitrary four-dimensional right-hand side.
pub fn integrate_with<F>(mut rhs: F, opts: &IntegrationOptions) -> Result<Trajectory, IntegrateError>
where
    F: FnMut(f64, &State) -> State,
{
    opts.validate()?;
    let (start, end) = opts.zeta_span;
    let span = end - start;
    let dz = opts.sample_interval;
    let n_samples = (span / dz + 1e-9).floor() as usize + 1;
    let grid = |i: usize| start + i as f64 * dz;
    let min_step = 1e-12 * span;

    let mut t = start;
    let mut y = opts.initial_state.to_array();
    let mut zetas = Vec::with_capacity(n_samples);
    let mut states = Vec::with_capacity(n_samples);
    let mut stats = StepStats::default();

    if max_norm(&y) > opts.blowup_threshold {
        return Ok(Trajectory {
            zetas,
            states,
            termination: Termination::Blowup { zeta: start },
            stats,
            sample_interval: dz,
        });
    }
    zetas.push(start);
    states.push(PhaseState::from_array(y));
    let mut next = 1;

    let mut k1 = rhs(t, &y);
    stats.evaluations += 1;
    let mut h = initial_step(&mut rhs, t, &y, &k1, opts);
    stats.evaluations += 1;
    let mut last_rejected = false;

    while t < end && next < n_samples {
        let final_step = t + h >= end;
        if final_step {
            h = end - t;
        }
        let k2 = rhs(t + C2 * h, &axpy(&y, &[(h * A21, &k1)]));
        let k3 = rhs(t + C3 * h, &axpy(&y, &[(h * A31, &k1), (h * A32, &k2)]));
        let k4 = rhs(t + C4 * h, &axpy(&y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]));
        let k5 = rhs(t + C5 * h, &axpy(&y, &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]));
        let k6 = rhs(
            t + h,
            &axpy(&y, &[(h * A61, &k1), (h * A62, &k2), (h * A63, &k3), (h * A64, &k4), (h * A65, &k5)]),
        );
        let y1 = axpy(&y, &[(h * A71, &k1), (h * A73, &k3), (h * A74, &k4), (h * A75, &k5), (h * A76, &k6)]);
        let k7 = rhs(t + h, &y1);
        stats.evaluations += 6;

        let err_vec = axpy(
            &[0.0; 4],
            &[(h * E1, &k1), (h * E3, &k3), (h * E4, &k4), (h * E5, &k5), (h * E6, &k6), (h * E7, &k7)],
        );
        let err = rms_error(&err_vec, &y, &y1, opts.rel_tol, opts.abs_tol);

        if !(err <= 1.0) {
            stats.rejected += 1;
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.2, 1.0) } else { 0.2 };
            h *= fac;
            last_rejected = true;
            if h < min_step {
                return Err(IntegrateError::StepSizeUnderflow { zeta: t, step: h });
            }
            continue;
        }
        stats.accepted += 1;

        let mut rc = [[0.0; 4]; 5];
        for i in 0..4 {
            let dy = y1[i] - y[i];
            let bspl = h * k1[i] - dy;
            rc[0][i] = y[i];
            rc[1][i] = dy;
            rc[2][i] = bspl;
            rc[3][i] = dy - h * k7[i] - bspl;
            rc[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        let dense = Dense { t0: t, h, r: rc };
        let t1 = if final_step { end } else { t + h };

        if max_norm(&y1) > opts.blowup_threshold {
            // Bracket the threshold crossing on the interpolant.
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            while (hi - lo) * h > 1e-6 {
                let mid = 0.5 * (lo + hi);
                if max_norm(&dense.eval(mid)) > opts.blowup_threshold {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let zeta_star = t + hi * h;
            let safe = t + lo * h;
            while next < n_samples && grid(next) <= safe {
                let s = dense.at(grid(next));
                if !(s.iter().all(|x| x.is_finite()) && max_norm(&s) <= opts.blowup_threshold) {
                    break;
                }
                zetas.push(grid(next));
                states.push(PhaseState::from_array(s));
                next += 1;
            }
            return Ok(Trajectory {
                zetas,
                states,
                termination: Termination::Blowup { zeta: zeta_star },
                stats,
                sample_interval: dz,
            });
        }

        while next < n_samples && grid(next) <= t1 {
            let g = grid(next);
            let s = if final_step && g >= end { y1 } else { dense.at(g) };
            zetas.push(g);
            states.push(PhaseState::from_array(s));
            next += 1;
        }

        let mut fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        t = t1;
        y = y1;
        k1 = k7;
        h = (h * fac).min(opts.max_step);
        if h < min_step && t < end {
            return Err(IntegrateError::StepSizeUnderflow { zeta: t, step: h });
        }
    }

    Ok(Trajectory { zetas, states, termination: Termination::Completed, stats, sample_interval: dz })
}

/// Integrates the traveling-wave system of `spec` at wave speed `v`.
pub fn integrate(spec: &ModelSpec, v: f64, opts: &IntegrationOptions) -> Result<Trajectory, IntegrateError> {
    integrate_with(|_, y| spec.rhs_array(v, y), opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    DecayToFixedPoint,
    LimitCycle,
    AperiodicBounded,
    Blowup,
}

impl Classification {
    pub fn label(self) -> &'static str {
        match self {
            Classification::DecayToFixedPoint => "decay_to_fixed_point",
            Classification::LimitCycle => "limit_cycle",
            Classification::AperiodicBounded => "aperiodic_bounded",
            Classification::Blowup => "blowup",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Decay threshold on final distance over initial distance to the fixed point.
pub const DECAY_RATIO: f64 = 1e-4;
/// Limit-cycle threshold on the relative spread of the last peak amplitudes.
pub const LIMIT_CYCLE_SPREAD: f64 = 0.01;
/// Peaks compared for the limit-cycle test.
pub const TREND_PEAKS: usize = 10;
/// Peaks needed before peak statistics are trusted.
pub const MIN_PEAKS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationSummary {
    pub classification: Classification,
    /// Up to the last ten peak amplitudes, half the rise of `N` from the
    /// preceding trough.
    pub amplitude_trend: Vec<f64>,
    /// `(max - min) / |mean|` of `amplitude_trend`.
    pub amplitude_spread: Option<f64>,
    /// Mean spacing of consecutive peaks.
    pub period_estimate: Option<f64>,
    pub peak_count: usize,
    /// Final distance to the fixed point over the initial distance.
    pub distance_ratio: f64,
    /// The same ratio for the trivial equilibrium at the origin.
    pub trivial_distance_ratio: f64,
    pub final_state: PhaseState,
}

/// Refined local maxima of a uniformly sampled series: `(position, value)`
/// with position in sample units.
pub fn find_peaks(y: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
        if b > a && b >= c {
            let den = a - 2.0 * b + c;
            let (off, val) = if den < 0.0 {
                let off = 0.5 * (a - c) / den;
                (off, b - 0.25 * (a - c) * off)
            } else {
                (0.0, b)
            };
            out.push((i as f64 + off, val));
        }
    }
    out
}

/// Classifies the dynamics after dropping the leading `transient_fraction` of
/// samples.
///
/// Decay when the final distance to `fp`, or to the trivial equilibrium at the
/// origin, is below [`DECAY_RATIO`] times the initial distance; limit cycle when the last [`TREND_PEAKS`] amplitudes of
/// `N` spread by less than [`LIMIT_CYCLE_SPREAD`]; aperiodic otherwise.
pub fn summarize_oscillation(
    traj: &Trajectory,
    fp: &FixedPoint,
    transient_fraction: f64,
) -> Result<OscillationSummary, IntegrateError> {
    if !(0.0..=0.9).contains(&transient_fraction) {
        return Err(IntegrateError::InvalidTransient(transient_fraction));
    }
    let final_state = *traj.last().ok_or(IntegrateError::EmptyTrajectory)?;
    let distance_ratio = decay_ratio(traj, &fp.state());
    let trivial_ratio = decay_ratio(traj, &PhaseState::default());

    let skip = (transient_fraction * traj.len() as f64).floor() as usize;
    let n: Vec<f64> = traj.states[skip..].iter().map(|s| s.n).collect();
    let peaks = find_peaks(&n);
    // Half the rise from the trough preceding each peak.
    let amplitudes: Vec<f64> = peaks
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].0.floor() as usize, (w[1].0.ceil() as usize).min(n.len() - 1));
            let trough = n[a..=b].iter().copied().fold(f64::INFINITY, f64::min);
            0.5 * (w[1].1 - trough)
        })
        .collect();
    let trend: Vec<f64> = amplitudes[amplitudes.len().saturating_sub(TREND_PEAKS)..].to_vec();
    let amplitude_spread = (trend.len() >= 2).then(|| {
        let (lo, hi) = trend.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| (lo.min(*a), hi.max(*a)));
        let mean = trend.iter().sum::<f64>() / trend.len() as f64;
        (hi - lo) / mean.abs()
    });
    let period_estimate = (peaks.len() >= 2)
        .then(|| (peaks[peaks.len() - 1].0 - peaks[0].0) / (peaks.len() - 1) as f64 * traj.sample_interval);

    let classification = if traj.is_blowup() {
        Classification::Blowup
    } else if distance_ratio < DECAY_RATIO || trivial_ratio < DECAY_RATIO {
        Classification::DecayToFixedPoint
    } else if peaks.len() < MIN_PEAKS {
        return Err(IntegrateError::TooFewPeaks { found: peaks.len(), needed: MIN_PEAKS });
    } else if amplitude_spread.is_some_and(|s| s < LIMIT_CYCLE_SPREAD) {
        Classification::LimitCycle
    } else {
        Classification::AperiodicBounded
    };

    Ok(OscillationSummary {
        classification,
        amplitude_trend: trend,
        amplitude_spread,
        period_estimate,
        peak_count: peaks.len(),
        distance_ratio,
        trivial_distance_ratio: trivial_ratio,
        final_state,
    })
}

/// Final over initial distance to `target`; the final distance alone when the
/// orbit starts on it.
fn decay_ratio(traj: &Trajectory, target: &PhaseState) -> f64 {
    let initial = traj.states[0].distance(target);
    let last = traj.states[traj.len() - 1].distance(target);
    if initial > 0.0 { last / initial } else { last }
}

/// One component on the uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub values: Vec<f64>,
    pub dzeta: f64,
}

pub fn resample_series(traj: &Trajectory, component: Component) -> Result<Series, IntegrateError> {
    if traj.is_empty() {
        return Err(IntegrateError::EmptyTrajectory);
    }
    Ok(Series { values: traj.states.iter().map(|s| s.get(component)).collect(), dzeta: traj.sample_interval })
}
