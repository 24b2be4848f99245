//! The five subcommands.

use std::fs::{self, File};
use std::io::{BufWriter, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wavetrain_core::diagnostics::{
    autocorrelation, cluster_fractal_dimension, embed, power_spectral_density, spectral_flatness, FractalOptions,
    PsdOptions, MIN_FRACTAL_POINTS,
};
use wavetrain_core::integrate::{
    default_initial_state, integrate, resample_series, summarize_oscillation, IntegrationOptions, Termination,
    Trajectory,
};
use wavetrain_core::io::{write_acf_csv, write_scaling_csv, write_spectrum_csv, write_trajectory_csv, TrajectoryMetadata};
use wavetrain_core::model::{fixed_points, make_preset, Component, FixedPoint, ModelSpec, SystemId};
use wavetrain_core::report::{
    to_json, to_text, AcfSummary, AnalysisReport, DiagnosticsReport, FractalSummary, ModelSummary, SimulationReport,
    SpectrumSummary,
};
use wavetrain_core::stability::{analyze_hopf, analyze_speed, SpeedReport};

use crate::args::{Format, PresetArgs, Settings};
use crate::failure::{code, Failure};
use crate::svg::{self, Line, Plot};

const SIMULATE_SPAN: (f64, f64) = (0.0, 600.0);
const DIAGNOSE_SPAN: (f64, f64) = (0.0, 2000.0);
const MAX_SEGMENT: usize = 4096;

/// Writes named artifacts according to the requested formats.
struct Sink<'a> {
    settings: &'a Settings,
}

impl Sink<'_> {
    fn wants(&self, f: Format) -> bool {
        self.settings.formats.contains(&f)
    }

    fn path(&self, name: &str) -> Result<Option<std::path::PathBuf>, Failure> {
        match &self.settings.out {
            Some(dir) => {
                fs::create_dir_all(dir)
                    .map_err(|e| Failure::config(format!("cannot create output directory {}: {e}", dir.display())))?;
                Ok(Some(dir.join(name)))
            }
            None => Ok(None),
        }
    }

    /// Text goes to stdout (and `<stem>.txt`); structured goes to
    /// `<stem>.json`, or stdout without `--out`.
    fn report<T: Serialize>(&self, stem: &str, report: &T, text: &str) -> Result<(), Failure> {
        if self.wants(Format::Text) {
            print!("{text}");
            if let Some(p) = self.path(&format!("{stem}.txt"))? {
                fs::write(p, text)?;
            }
        }
        if self.wants(Format::Structured) {
            let json = to_json(report);
            match self.path(&format!("{stem}.json"))? {
                Some(p) => fs::write(p, json + "\n")?,
                None => println!("{json}"),
            }
        }
        Ok(())
    }

    fn csv(&self, name: &str, write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), Failure> {
        if !self.wants(Format::Csv) {
            return Ok(());
        }
        if let Some(p) = self.path(name)? {
            let mut w = BufWriter::new(File::create(p)?);
            write(&mut w)?;
            w.flush()?;
        }
        Ok(())
    }

    fn svg(&self, name: &str, plot: impl FnOnce() -> String) -> Result<(), Failure> {
        if !self.wants(Format::Svg) {
            return Ok(());
        }
        if let Some(p) = self.path(name)? {
            fs::write(p, plot())?;
        }
        Ok(())
    }
}

fn model(settings: &Settings) -> Result<ModelSpec, Failure> {
    Ok(settings.model.build()?)
}

/// The requested fixed point, or the first physical one.
fn choose_fixed_point(spec: &ModelSpec, index: Option<usize>) -> Result<(Vec<FixedPoint>, usize), Failure> {
    let fps = fixed_points(spec)?;
    let chosen = match index {
        Some(i) if i < fps.len() => i,
        Some(i) => return Err(Failure::config(format!("fp-index {i} out of range ({} fixed points)", fps.len()))),
        None => fps.iter().position(FixedPoint::is_physical).ok_or_else(|| {
            let listing: Vec<String> =
                fps.iter().map(|fp| format!("  (N0, P0) = ({:.6}, {:.6})", fp.n0, fp.p0)).collect();
            Failure::new(
                code::NO_PHYSICAL_FIXED_POINT,
                format!("no physical fixed point (N0, P0 > 0); roots:\n{}", listing.join("\n")),
            )
        })?,
    };
    Ok((fps, chosen))
}

fn require_v(settings: &Settings) -> Result<f64, Failure> {
    settings.v.ok_or_else(|| Failure::config("--v is required"))
}

fn integration_options(settings: &Settings, fp: &FixedPoint, default_span: (f64, f64)) -> Result<IntegrationOptions, Failure> {
    let mut o = IntegrationOptions::new(
        settings.span.unwrap_or(default_span),
        settings.ic.unwrap_or_else(|| default_initial_state(fp)),
    );
    if let Some(t) = settings.rel_tol {
        o.rel_tol = t;
    }
    if let Some(t) = settings.abs_tol {
        o.abs_tol = t;
    }
    if let Some(h) = settings.sample_interval {
        o.sample_interval = h;
    }
    o.validate()?;
    Ok(o)
}

pub fn analyze(settings: &Settings) -> Result<(), Failure> {
    let spec = model(settings)?;
    let v = require_v(settings)?;
    let (fps, chosen) = choose_fixed_point(&spec, settings.fp_index)?;
    let fp = fps[chosen];
    let report = AnalysisReport {
        model: ModelSummary::of(&spec),
        v,
        speed: analyze_speed(&spec, &fp, v)?,
        hopf: analyze_hopf(&spec, &fp)?,
        fixed_points: fps,
        selected_fixed_point: chosen,
    };
    Sink { settings }.report("analysis", &report, &to_text(&report))
}

fn trajectory_plot(traj: &Trajectory) -> String {
    let n: Vec<f64> = traj.states.iter().map(|s| s.n).collect();
    let p: Vec<f64> = traj.states.iter().map(|s| s.p).collect();
    svg::render(&Plot {
        title: "Populations along the wave",
        x_label: "ζ",
        y_label: "population",
        lines: vec![Line { label: "N", x: &traj.zetas, y: &n }, Line { label: "P", x: &traj.zetas, y: &p }],
        reference: None,
    })
}

pub fn simulate(settings: &Settings) -> Result<(), Failure> {
    let spec = model(settings)?;
    let v = require_v(settings)?;
    let (fps, chosen) = choose_fixed_point(&spec, settings.fp_index)?;
    let fp = fps[chosen];
    let options = integration_options(settings, &fp, SIMULATE_SPAN)?;
    let traj = integrate(&spec, v, &options)?;
    let (summary, summary_error) = match summarize_oscillation(&traj, &fp, settings.transient) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let report = SimulationReport {
        model: ModelSummary::of(&spec),
        v,
        fixed_point: fp,
        options,
        termination: traj.termination,
        stats: traj.stats,
        samples: traj.len(),
        transient_fraction: settings.transient,
        summary,
        summary_error,
    };
    let sink = Sink { settings };
    let headline = match (&report.summary, traj.termination) {
        (_, Termination::Blowup { zeta }) => format!("classification = blowup (zeta* = {zeta})\n"),
        (Some(s), _) => format!("classification = {}\n", s.classification),
        (None, _) => "classification = unavailable\n".to_string(),
    };
    sink.report("simulation", &report, &(headline + &to_text(&report)))?;
    sink.csv("trajectory.csv", |w| write_trajectory_csv(w, &traj))?;
    sink.csv("trajectory_meta.json", |w| writeln!(w, "{}", to_json(&TrajectoryMetadata::of(&traj))))?;
    sink.svg("trajectory.svg", || trajectory_plot(&traj))
}

pub fn diagnose(settings: &Settings) -> Result<(), Failure> {
    let spec = model(settings)?;
    let v = require_v(settings)?;
    let (fps, chosen) = choose_fixed_point(&spec, settings.fp_index)?;
    let fp = fps[chosen];
    let options = integration_options(settings, &fp, DIAGNOSE_SPAN)?;
    let traj = integrate(&spec, v, &options)?;
    if let Termination::Blowup { zeta } = traj.termination {
        return Err(Failure::new(
            code::DIAGNOSTICS,
            format!("diagnostics require bounded dynamics: trajectory blows up at zeta = {zeta}"),
        ));
    }
    let series = resample_series(&traj, Component::N)?;
    let skip = (settings.transient * series.values.len() as f64).floor() as usize;
    let tail = &series.values[skip..];
    if tail.len() < MIN_FRACTAL_POINTS {
        return Err(Failure::new(
            code::DIAGNOSTICS,
            format!("diagnostics need at least {MIN_FRACTAL_POINTS} post-transient samples, got {}", tail.len()),
        ));
    }
    let spectrum = power_spectral_density(tail, series.dzeta, &PsdOptions::for_length(tail.len(), MAX_SEGMENT))?;
    let acf = autocorrelation(tail, None)?;
    let cloud = embed(&traj, settings.embed_dim, settings.transient)?;
    let fractal = cluster_fractal_dimension(&cloud, &FractalOptions::default())?;

    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let variance = tail.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / tail.len() as f64;
    let report = DiagnosticsReport {
        model: ModelSummary::of(&spec),
        v,
        samples: tail.len(),
        transient_fraction: settings.transient,
        spectrum: SpectrumSummary {
            segment_length: spectrum.segment_length,
            segments: spectrum.segments,
            peak_frequency: spectrum.peak_frequency(),
            total_power: spectrum.total_power(),
            variance,
            flatness: spectral_flatness(&spectrum),
        },
        acf: AcfSummary::from_acf(&acf, series.dzeta),
        fractal: FractalSummary {
            embed_dim: settings.embed_dim,
            points: cloud.len(),
            reference_points: fractal.reference_points,
            dimension: fractal.dimension,
            plateau_range: fractal.plateau_range,
            cluster_prefactor: fractal.cluster_prefactor,
        },
    };

    let sink = Sink { settings };
    sink.report("diagnostics", &report, &to_text(&report))?;
    sink.csv("spectrum.csv", |w| write_spectrum_csv(w, &spectrum))?;
    sink.csv("acf.csv", |w| write_acf_csv(w, &acf, series.dzeta))?;
    sink.csv("scaling.csv", |w| write_scaling_csv(w, &fractal))?;
    sink.svg("psd.svg", || {
        svg::render(&Plot {
            title: "Power spectral density of N",
            x_label: "frequency",
            y_label: "power",
            lines: vec![Line { label: "PSD", x: &spectrum.frequencies, y: &spectrum.power }],
            reference: None,
        })
    })?;
    sink.svg("log_psd.svg", || {
        let log_p: Vec<f64> = spectrum.power.iter().map(|p| p.max(1e-300).log10()).collect();
        svg::render(&Plot {
            title: "Log power spectral density of N",
            x_label: "frequency",
            y_label: "log10 power",
            lines: vec![Line { label: "log10 PSD", x: &spectrum.frequencies, y: &log_p }],
            reference: None,
        })
    })?;
    sink.svg("slopes.svg", || {
        let label = fractal.dimension.map(|d| format!("D = {d:.3}"));
        svg::render(&Plot {
            title: "Local slope of log n against log R(n)",
            x_label: "log n",
            y_label: "d log n / d log R",
            lines: vec![Line { label: "local slope", x: &fractal.log_n, y: &fractal.local_slopes }],
            reference: fractal.dimension.zip(label.as_deref()),
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub v: f64,
    pub speed: SpeedReport,
    /// The Hopf quantity `c4` changes sign between the previous nonzero row and this one.
    pub c4_sign_change: bool,
    pub classification: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub model: ModelSummary,
    pub fixed_point: FixedPoint,
    pub rows: Vec<SweepRow>,
    /// Speed intervals bracketing a sign change of `c4`.
    pub c4_brackets: Vec<(f64, f64)>,
}

fn sign(x: f64, scale: f64) -> i8 {
    if x.abs() <= 1e-12 * scale {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

/// Marks rows where `c4` has flipped sign since the last row with a clear sign.
fn mark_sign_changes(rows: &mut [SweepRow]) -> Vec<(f64, f64)> {
    let scale = rows.iter().map(|r| r.speed.routh_hurwitz.c4.abs()).fold(0.0, f64::max);
    let mut brackets = Vec::new();
    let mut last: Option<(f64, i8)> = None;
    for row in rows.iter_mut() {
        let s = sign(row.speed.routh_hurwitz.c4, scale);
        if s == 0 {
            continue;
        }
        if let Some((v0, s0)) = last {
            if s0 != s {
                row.c4_sign_change = true;
                brackets.push((v0, row.v));
            }
        }
        last = Some((row.v, s));
    }
    brackets
}

fn sweep_table(report: &SweepReport) -> String {
    let mut out = format!(
        "{:>12} {:>13} {:>13} {:>13} {:>13} {:>7} {:>13} {:>6}  {}\n",
        "v", "c1", "c2", "c3", "c4", "stable", "max_re", "flip", "classification"
    );
    for r in &report.rows {
        let rh = &r.speed.routh_hurwitz;
        out.push_str(&format!(
            "{:>12.6} {:>13.6e} {:>13.6e} {:>13.6e} {:>13.6e} {:>7} {:>13.6e} {:>6}  {}\n",
            r.v,
            rh.c1,
            rh.c2,
            rh.c3,
            rh.c4,
            rh.stable,
            r.speed.max_real_part,
            if r.c4_sign_change { "*" } else { "" },
            r.classification.as_deref().or(r.error.as_deref()).unwrap_or("-")
        ));
    }
    for (a, b) in &report.c4_brackets {
        out.push_str(&format!("c4 changes sign between v = {a} and v = {b}\n"));
    }
    out
}

fn write_sweep_csv<W: Write>(mut w: W, report: &SweepReport) -> std::io::Result<()> {
    writeln!(w, "v,b1,b2,b3,b4,c1,c2,c3,c4,stable,max_real_part,c4_sign_change,classification")?;
    for r in &report.rows {
        let (b, rh) = (&r.speed.coeffs, &r.speed.routh_hurwitz);
        writeln!(
            w,
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{:?},{},{}",
            r.v,
            b.b1,
            b.b2,
            b.b3,
            b.b4,
            rh.c1,
            rh.c2,
            rh.c3,
            rh.c4,
            rh.stable,
            r.speed.max_real_part,
            r.c4_sign_change,
            r.classification.as_deref().unwrap_or("")
        )?;
    }
    Ok(())
}

pub fn sweep(settings: &Settings) -> Result<(), Failure> {
    let spec = model(settings)?;
    let (lo, hi, count) = settings.v_range.ok_or_else(|| Failure::config("sweep needs --v-range MIN:MAX:COUNT"))?;
    let (fps, chosen) = choose_fixed_point(&spec, settings.fp_index)?;
    let fp = fps[chosen];
    let options = integration_options(settings, &fp, SIMULATE_SPAN)?;
    let grid: Vec<f64> = (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect();
    let sink = Sink { settings };
    let point_dir = settings.simulate && sink.wants(Format::Csv);

    let run_point = |(i, &v): (usize, &f64)| -> Result<SweepRow, Failure> {
        let speed = analyze_speed(&spec, &fp, v)?;
        let (mut classification, mut error) = (None, None);
        if settings.simulate {
            match integrate(&spec, v, &options) {
                Ok(traj) => {
                    match summarize_oscillation(&traj, &fp, settings.transient) {
                        Ok(s) => classification = Some(s.classification.label().to_string()),
                        Err(e) => error = Some(e.to_string()),
                    }
                    if point_dir {
                        sink.csv(&format!("sweep_points/point_{i:04}.csv"), |w| write_trajectory_csv(w, &traj))?;
                    }
                }
                Err(e) => error = Some(e.to_string()),
            }
        }
        Ok(SweepRow { v, speed, c4_sign_change: false, classification, error })
    };

    if point_dir {
        sink.path("sweep_points")?.map(fs::create_dir_all).transpose()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers.unwrap_or(0))
        .build()
        .map_err(|e| Failure::config(format!("thread pool: {e}")))?;
    let mut rows: Vec<SweepRow> =
        pool.install(|| grid.par_iter().enumerate().map(run_point).collect::<Result<_, Failure>>())?;
    let c4_brackets = mark_sign_changes(&mut rows);
    let report = SweepReport { model: ModelSummary::of(&spec), fixed_point: fp, rows, c4_brackets };

    sink.report("sweep", &report, &sweep_table(&report))?;
    sink.csv("sweep.csv", |w| write_sweep_csv(w, &report))?;
    sink.svg("sweep.svg", || {
        let v: Vec<f64> = report.rows.iter().map(|r| r.v).collect();
        let c4: Vec<f64> = report.rows.iter().map(|r| r.speed.routh_hurwitz.c4).collect();
        let re: Vec<f64> = report.rows.iter().map(|r| r.speed.max_real_part).collect();
        svg::render(&Plot {
            title: "Stability across wave speeds",
            x_label: "v",
            y_label: "value",
            lines: vec![Line { label: "c4", x: &v, y: &c4 }, Line { label: "max Re λ", x: &v, y: &re }],
            reference: Some((0.0, "0")),
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresetsReport {
    pub presets: Vec<ModelSummary>,
}

pub fn presets(args: &PresetArgs) -> Result<(), Failure> {
    let report = PresetsReport {
        presets: SystemId::ALL.iter().map(|&id| make_preset(id, &[]).map(|s| ModelSummary::of(&s))).collect::<Result<_, _>>()?,
    };
    if args.format.contains(&Format::Csv) || args.format.contains(&Format::Svg) {
        return Err(Failure::config("presets supports text and structured formats"));
    }
    if args.format.contains(&Format::Text) {
        for p in &report.presets {
            let params: Vec<String> = p.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let id = p.system.map(|s| s.to_string()).unwrap_or_default();
            println!("{id}: {}", params.join(" "));
        }
    }
    if args.format.contains(&Format::Structured) {
        println!("{}", to_json(&report));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use wavetrain_core::stability::{CharCoeffs, RouthHurwitzReport, VolumeKind, VolumeRate};

    fn row(v: f64, c4: f64) -> SweepRow {
        let b = CharCoeffs::new(1.0, 1.0, 1.0, 1.0);
        SweepRow {
            v,
            speed: SpeedReport {
                v,
                coeffs: b,
                routh_hurwitz: RouthHurwitzReport { c1: 1.0, c2: 1.0, c3: 1.0, c4, flags: [true; 4], stable: c4 > 0.0 },
                volume: VolumeRate { rate: -1.0, kind: VolumeKind::Contracting },
                max_real_part: -1.0,
            },
            c4_sign_change: false,
            classification: None,
            error: None,
        }
    }

    #[test]
    fn sign_changes_skip_zeros() {
        let mut rows = vec![row(1.0, -1.0), row(2.0, 1e-20), row(3.0, 2.0), row(4.0, 3.0), row(5.0, -1.0)];
        let b = mark_sign_changes(&mut rows);
        assert_eq!(b, vec![(1.0, 3.0), (4.0, 5.0)]);
        let flags: Vec<bool> = rows.iter().map(|r| r.c4_sign_change).collect();
        assert_eq!(flags, vec![false, false, true, false, true]);
    }
}
