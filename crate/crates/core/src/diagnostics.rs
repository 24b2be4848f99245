//! Chaos diagnostics for sampled series and phase-space point sets.
//!
//! * [`power_spectral_density`]: Welch averaging of Hann-tapered periodograms.
//! * [`autocorrelation`]: biased, normalized ACF via FFT.
//! * [`spectral_flatness`]: geometric over arithmetic mean of the PSD.
//! * [`cluster_fractal_dimension`]: the exponent `D` in `n = k R(n)^D`, where
//!   `R(n)` is the mean distance from a reference point to its `n`-th nearest
//!   neighbour.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::DiagnosticsError;
use crate::integrate::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdOptions {
    /// Samples per segment, a power of two.
    pub segment_length: usize,
}

impl Default for PsdOptions {
    fn default() -> Self {
        Self { segment_length: 1024 }
    }
}

impl PsdOptions {
    /// Largest power-of-two segment, at most `max_segment`, that fits at
    /// least seven half-overlapping segments into `len` samples (never below 16).
    pub fn for_length(len: usize, max_segment: usize) -> Self {
        let mut seg = max_segment.next_power_of_two();
        while seg > 16 && len < 4 * seg {
            seg /= 2;
        }
        Self { segment_length: seg }
    }
}

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// `k / (segment_length Δζ)`, `k = 0..=segment_length/2`.
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
    pub window: String,
    pub segment_length: usize,
    /// Overlap between consecutive segments, in samples.
    pub overlap: usize,
    pub segments: usize,
}

impl Spectrum {
    pub fn resolution(&self) -> f64 {
        self.frequencies.get(1).copied().unwrap_or(0.0)
    }

    /// Frequency of the largest bin above DC.
    pub fn peak_frequency(&self) -> f64 {
        let k = (1..self.power.len()).max_by(|&a, &b| self.power[a].total_cmp(&self.power[b])).unwrap_or(0);
        self.frequencies[k]
    }

    /// `Σ P Δf`, the variance the spectrum accounts for.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.resolution()
    }
}

fn check_finite(series: &[f64]) -> Result<(), DiagnosticsError> {
    if series.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(DiagnosticsError::NonFinite)
    }
}

fn hann(len: usize) -> Vec<f64> {
    (0..len).map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / len as f64).cos())).collect()
}

/// Welch estimate with a periodic Hann window and 50% overlap.
///
/// Each segment has its mean removed. The density is scaled by
/// `1/(fs Σw²)` and folded to one side, so `Σ P Δf` approximates the variance.
pub fn power_spectral_density(series: &[f64], dzeta: f64, opts: &PsdOptions) -> Result<Spectrum, DiagnosticsError> {
    let seg = opts.segment_length;
    if seg < 4 || !seg.is_power_of_two() {
        return Err(DiagnosticsError::SegmentLength(seg));
    }
    if series.len() < 2 * seg {
        return Err(DiagnosticsError::SeriesTooShort { len: series.len(), required: 2 * seg });
    }
    check_finite(series)?;

    let fs = 1.0 / dzeta;
    let step = seg / 2;
    let segments = (series.len() - seg) / step + 1;
    let window = hann(seg);
    let scale = 1.0 / (fs * window.iter().map(|w| w * w).sum::<f64>());
    let fft = FftPlanner::<f64>::new().plan_fft_forward(seg);
    let half = seg / 2;

    let mut power = vec![0.0; half + 1];
    let mut buf = vec![Complex::new(0.0, 0.0); seg];
    for s in 0..segments {
        let chunk = &series[s * step..s * step + seg];
        let mean = chunk.iter().sum::<f64>() / seg as f64;
        for ((b, x), w) in buf.iter_mut().zip(chunk).zip(&window) {
            *b = Complex::new((x - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (k, p) in power.iter_mut().enumerate() {
            *p += buf[k].norm_sqr();
        }
    }
    for (k, p) in power.iter_mut().enumerate() {
        let fold = if k == 0 || k == half { 1.0 } else { 2.0 };
        *p *= fold * scale / segments as f64;
    }
    let frequencies = (0..=half).map(|k| k as f64 * fs / seg as f64).collect();
    Ok(Spectrum { frequencies, power, window: "hann".into(), segment_length: seg, overlap: step, segments })
}

/// Biased autocorrelation normalized to `ACF(0) = 1`, lags `0..=max_lag`.
///
/// `max_lag` defaults to `len / 4`.
pub fn autocorrelation(series: &[f64], max_lag: Option<usize>) -> Result<Vec<f64>, DiagnosticsError> {
    let n = series.len();
    if n < 4 {
        return Err(DiagnosticsError::SeriesTooShort { len: n, required: 4 });
    }
    check_finite(series)?;
    let mean = series.iter().sum::<f64>() / n as f64;
    let var: f64 = series.iter().map(|x| (x - mean) * (x - mean)).sum();
    if !(var > 0.0) {
        return Err(DiagnosticsError::ZeroVariance);
    }
    let lags = max_lag.unwrap_or(n / 4).min(n - 1);

    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = series.iter().map(|x| Complex::new(x - mean, 0.0)).collect();
    buf.resize(size, Complex::new(0.0, 0.0));
    planner.plan_fft_forward(size).process(&mut buf);
    for z in &mut buf {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    // rustfft leaves the inverse unnormalized.
    let norm = buf[0].re;
    Ok(buf[..=lags].iter().map(|z| z.re / norm).collect())
}

/// Geometric over arithmetic mean of the bins above DC, each floored at
/// `1e-300`. Near 1 for broadband spectra, near 0 for line spectra.
pub fn spectral_flatness(spec: &Spectrum) -> f64 {
    let bins: Vec<f64> = spec.power.iter().skip(1).map(|p| p.max(1e-300)).collect();
    if bins.is_empty() {
        return 0.0;
    }
    let len = bins.len() as f64;
    let log_mean = bins.iter().map(|p| p.ln()).sum::<f64>() / len;
    let mean = bins.iter().sum::<f64>() / len;
    log_mean.exp() / mean
}

/// Points in an embedding space, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Self {
        assert!(dim > 0 && coords.len() % dim == 0, "coordinate count must be a multiple of dim");
        Self { dim, coords }
    }

    pub fn from_rows<const D: usize>(rows: &[[f64; D]]) -> Self {
        Self::new(D, rows.iter().flatten().copied().collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.dim, self.coords.iter().map(|x| x * s).collect())
    }
}

/// Embeds a trajectory after dropping its leading `transient_fraction`.
///
/// Dimension 2 uses `(N, P)`, 3 uses `(N, M, P)` and 4 the full state.
pub fn embed(traj: &Trajectory, dim: usize, transient_fraction: f64) -> Result<PointCloud, DiagnosticsError> {
    if !(2..=4).contains(&dim) {
        return Err(DiagnosticsError::EmbeddingDimension(dim));
    }
    let skip = (transient_fraction.clamp(0.0, 1.0) * traj.len() as f64).floor() as usize;
    let states = &traj.states[skip.min(traj.len())..];
    let mut coords = Vec::with_capacity(states.len() * dim);
    for s in states {
        match dim {
            2 => coords.extend([s.n, s.p]),
            3 => coords.extend([s.n, s.m, s.p]),
            _ => coords.extend(s.to_array()),
        }
    }
    Ok(PointCloud::new(dim, coords))
}

/// Minimum number of points accepted by [`cluster_fractal_dimension`].
pub const MIN_FRACTAL_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractalOptions {
    /// Evenly strided reference points.
    pub reference_points: usize,
    /// Points on the logarithmic grid of `n`.
    pub grid_points: usize,
    /// Minimum plateau width in decades of `n`.
    pub min_decades: f64,
    /// Maximum spread (max - min) of local slopes across the plateau.
    pub max_spread: f64,
}

impl Default for FractalOptions {
    fn default() -> Self {
        Self { reference_points: 200, grid_points: 40, min_decades: 1.0, max_spread: 0.3 }
    }
}

/// The scaling curve `log n` against `log R(n)` and its plateau slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractalEstimate {
    pub log_n: Vec<f64>,
    pub log_r: Vec<f64>,
    /// `d log n / d log R(n)` by centred differences.
    pub local_slopes: Vec<f64>,
    /// Median slope over the plateau; absent when no plateau qualifies.
    pub dimension: Option<f64>,
    /// `(n_lo, n_hi)` of the plateau.
    pub plateau_range: Option<(f64, f64)>,
    /// `k` in `n = k R(n)^D`.
    pub cluster_prefactor: Option<f64>,
    pub reference_points: usize,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn sorted_neighbor_distances(points: &PointCloud, reference_points: usize) -> Vec<Vec<f64>> {
    let len = points.len();
    let m = reference_points.clamp(1, len);
    let stride = len / m;
    (0..m)
        .into_par_iter()
        .map(|r| {
            let i = r * stride;
            let p = points.point(i);
            let mut d: Vec<f64> = (0..len)
                .filter(|&j| j != i)
                .map(|j| distance(p, points.point(j)))
                .filter(|&x| x > 0.0)
                .collect();
            d.sort_by(f64::total_cmp);
            d
        })
        .collect()
}

/// `R(n)` for every `n = 1..=n_max`, where `n_max` is the smallest count of
/// nonzero neighbour distances across the reference points.
pub fn mean_neighbor_radii(points: &PointCloud, reference_points: usize) -> Vec<f64> {
    radii_from(&sorted_neighbor_distances(points, reference_points))
}

fn radii_from(dists: &[Vec<f64>]) -> Vec<f64> {
    let n_max = dists.iter().map(Vec::len).min().unwrap_or(0);
    let m = dists.len() as f64;
    (0..n_max).map(|k| dists.iter().map(|d| d[k]).sum::<f64>() / m).collect()
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Cluster fractal dimension of a point set.
///
/// No plateau is not an error: the curve is returned with `dimension` absent.
pub fn cluster_fractal_dimension(points: &PointCloud, opts: &FractalOptions) -> Result<FractalEstimate, DiagnosticsError> {
    if !(2..=4).contains(&points.dim()) {
        return Err(DiagnosticsError::EmbeddingDimension(points.dim()));
    }
    if points.len() < MIN_FRACTAL_POINTS {
        return Err(DiagnosticsError::TooFewPoints { len: points.len(), required: MIN_FRACTAL_POINTS });
    }
    check_finite(&points.coords)?;

    let dists = sorted_neighbor_distances(points, opts.reference_points);
    let radii = radii_from(&dists);
    if radii.len() < 3 {
        return Err(DiagnosticsError::TooFewPoints { len: radii.len(), required: 3 });
    }
    let n_max = radii.len() as f64;
    let mut ns: Vec<usize> = (0..opts.grid_points.max(3))
        .map(|j| (n_max.ln() * j as f64 / (opts.grid_points.max(3) - 1) as f64).exp().round() as usize)
        .map(|n| n.clamp(1, radii.len()))
        .collect();
    ns.dedup();

    let log_n: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let log_r: Vec<f64> = ns.iter().map(|&n| radii[n - 1].ln()).collect();
    let last = ns.len() - 1;
    let local_slopes: Vec<f64> = (0..ns.len())
        .map(|j| {
            let (a, b) = (j.saturating_sub(1), (j + 1).min(last));
            (log_n[b] - log_n[a]) / (log_r[b] - log_r[a])
        })
        .collect();

    // Widest window spanning at least `min_decades` with bounded slope spread.
    let mut best: Option<(usize, usize)> = None;
    for i in 0..ns.len() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for j in i..ns.len() {
            let s = local_slopes[j];
            if !s.is_finite() {
                break;
            }
            lo = lo.min(s);
            hi = hi.max(s);
            if hi - lo >= opts.max_spread {
                break;
            }
            let decades = (log_n[j] - log_n[i]) / std::f64::consts::LN_10;
            let wider = best.map_or(true, |(a, b)| log_n[j] - log_n[i] > log_n[b] - log_n[a]);
            if decades >= opts.min_decades && wider {
                best = Some((i, j));
            }
        }
    }

    let (dimension, plateau_range, cluster_prefactor) = match best {
        Some((i, j)) => {
            let d = median(&mut local_slopes[i..=j].to_vec());
            let log_k = (i..=j).map(|t| log_n[t] - d * log_r[t]).sum::<f64>() / (j - i + 1) as f64;
            (Some(d), Some((ns[i] as f64, ns[j] as f64)), Some(log_k.exp()))
        }
        None => (None, None, None),
    };

    Ok(FractalEstimate {
        log_n,
        log_r,
        local_slopes,
        dimension,
        plateau_range,
        cluster_prefactor,
        reference_points: dists.len(),
    })
}
