//! Command-line flags and their resolution against an optional config file.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wavetrain_core::model::{ModelConfig, PhaseState, SystemId};

use crate::failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "wavetrain", version, about = "Traveling-wave predator-prey stability, simulation and diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed points, characteristic coefficients and Hopf data at one speed.
    Analyze(RunArgs),
    /// Integrate the traveling-wave ODE and classify the orbit.
    Simulate(RunArgs),
    /// Spectrum, autocorrelation and fractal dimension of a bounded orbit.
    Diagnose(RunArgs),
    /// Stability (and optionally dynamics) over a grid of speeds.
    Sweep(RunArgs),
    /// List the built-in systems and their default parameters.
    Presets(PresetArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Format {
    Text,
    Structured,
    Csv,
    Svg,
}

#[derive(Debug, Args)]
pub struct PresetArgs {
    #[arg(long, value_delimiter = ',', default_value = "text")]
    pub format: Vec<Format>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Built-in system A..E.
    #[arg(long)]
    pub preset: Option<SystemId>,
    /// Flat key-value config file (model parameters and run options).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Wave speed.
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<f64>,
    /// Speed grid MIN:MAX:COUNT for sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub v_range: Option<String>,
    /// Integration interval A:B in ζ.
    #[arg(long, allow_hyphen_values = true)]
    pub span: Option<String>,
    /// Initial state N,M,P,Q (default: fixed point plus a small perturbation).
    #[arg(long, allow_hyphen_values = true)]
    pub ic: Option<String>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub sample_interval: Option<f64>,
    /// Leading fraction of samples dropped before summaries.
    #[arg(long)]
    pub transient: Option<f64>,
    /// Output directory for files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub format: Vec<Format>,
    /// Embedding for the fractal dimension: 2 (N,P), 3 (N,M,P) or 4.
    #[arg(long)]
    pub embed_dim: Option<usize>,
    /// Index into the fixed points sorted by N0 (default: first physical one).
    #[arg(long)]
    pub fp_index: Option<usize>,
    /// Worker threads for sweep.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Integrate at every sweep point.
    #[arg(long)]
    pub simulate: bool,
}

/// Run options after merging the config file with flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub model: ModelConfig,
    pub v: Option<f64>,
    pub v_range: Option<(f64, f64, usize)>,
    pub span: Option<(f64, f64)>,
    pub ic: Option<PhaseState>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub sample_interval: Option<f64>,
    pub transient: f64,
    pub out: Option<PathBuf>,
    pub formats: BTreeSet<Format>,
    pub embed_dim: usize,
    pub fp_index: Option<usize>,
    pub workers: Option<usize>,
    pub simulate: bool,
}

const RUN_KEYS: [&str; 9] =
    ["v", "v_range", "span", "ic", "rel_tol", "abs_tol", "sample_interval", "transient", "embed_dim"];

fn numbers(text: &str, sep: char, count: usize, what: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = text.split(sep).map(str::trim).collect();
    let vals: Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
    match vals {
        Ok(v) if v.len() == count && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(Failure::config(format!("{what}: expected {count} numbers separated by `{sep}`, got `{text}`"))),
    }
}

pub fn parse_span(text: &str) -> Result<(f64, f64), Failure> {
    let v = numbers(text, ':', 2, "span")?;
    if v[1] <= v[0] {
        return Err(Failure::config(format!("span `{text}` must have end > start")));
    }
    Ok((v[0], v[1]))
}

pub fn parse_v_range(text: &str) -> Result<(f64, f64, usize), Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Failure::config(format!("v-range: expected MIN:MAX:COUNT, got `{text}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v = numbers(&parts[..2].join(":"), ':', 2, "v-range")?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count < 2 || v[1] <= v[0] {
        return Err(Failure::config(format!("v-range `{text}` needs MAX > MIN and COUNT >= 2")));
    }
    Ok((v[0], v[1], count))
}

pub fn parse_ic(text: &str) -> Result<PhaseState, Failure> {
    let v = numbers(text, ',', 4, "ic")?;
    Ok(PhaseState::new(v[0], v[1], v[2], v[3]))
}

/// Run-option values found in a config file.
#[derive(Debug, Default)]
struct FileOptions {
    v: Option<f64>,
    v_range: Option<(f64, f64, usize)>,
    span: Option<(f64, f64)>,
    ic: Option<PhaseState>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    sample_interval: Option<f64>,
    transient: Option<f64>,
    embed_dim: Option<usize>,
}

fn file_number(key: &str, value: &toml::Value) -> Result<f64, Failure> {
    match value {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(Failure::config(format!("config: `{key}` must be a number"))),
    }
}

fn file_text<'a>(key: &str, value: &'a toml::Value) -> Result<&'a str, Failure> {
    value.as_str().ok_or_else(|| Failure::config(format!("config: `{key}` must be a string")))
}

/// Splits a config file into the model part and run options.
fn read_config(text: &str) -> Result<(ModelConfig, FileOptions), Failure> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Failure::config(format!("config: {e}")))?;
    let mut opts = FileOptions::default();
    for key in RUN_KEYS {
        let Some(value) = table.remove(key) else { continue };
        match key {
            "v" => opts.v = Some(file_number(key, &value)?),
            "v_range" => opts.v_range = Some(parse_v_range(file_text(key, &value)?)?),
            "span" => opts.span = Some(parse_span(file_text(key, &value)?)?),
            "ic" => opts.ic = Some(parse_ic(file_text(key, &value)?)?),
            "rel_tol" => opts.rel_tol = Some(file_number(key, &value)?),
            "abs_tol" => opts.abs_tol = Some(file_number(key, &value)?),
            "sample_interval" => opts.sample_interval = Some(file_number(key, &value)?),
            "transient" => opts.transient = Some(file_number(key, &value)?),
            _ => {
                let d = file_number(key, &value)?;
                if d.fract() != 0.0 || d < 0.0 {
                    return Err(Failure::config("config: `embed_dim` must be a whole number"));
                }
                opts.embed_dim = Some(d as usize);
            }
        }
    }
    let model = toml::to_string(&table).map_err(|e| Failure::config(format!("config: {e}")))?.parse::<ModelConfig>()?;
    Ok((model, opts))
}

impl RunArgs {
    /// Merges flags over the config file; flags win.
    pub fn resolve(&self) -> Result<Settings, Failure> {
        let (model, file) = match (&self.preset, &self.config) {
            (Some(_), Some(_)) => return Err(Failure::config("give exactly one of --preset and --config")),
            (None, None) => return Err(Failure::config("a model source is required: --preset or --config")),
            (Some(id), None) => (ModelConfig::new(*id), FileOptions::default()),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
                read_config(&text)?
            }
        };
        let transient = self.transient.or(file.transient).unwrap_or(0.2);
        if !(0.0..=0.9).contains(&transient) {
            return Err(Failure::config(format!("transient {transient} outside [0, 0.9]")));
        }
        let embed_dim = self.embed_dim.or(file.embed_dim).unwrap_or(3);
        if !(2..=4).contains(&embed_dim) {
            return Err(Failure::config(format!("embed-dim {embed_dim} not in {{2, 3, 4}}")));
        }
        if self.workers == Some(0) {
            return Err(Failure::config("workers must be at least 1"));
        }
        let mut formats: BTreeSet<Format> = self.format.iter().copied().collect();
        if formats.is_empty() {
            formats.insert(Format::Text);
        }
        if self.out.is_none() && (formats.contains(&Format::Csv) || formats.contains(&Format::Svg)) {
            return Err(Failure::config("csv and svg output need --out DIR"));
        }
        if let Some(v) = self.v {
            if !v.is_finite() {
                return Err(Failure::config("v must be finite"));
            }
        }
        Ok(Settings {
            model,
            v: self.v.or(file.v),
            v_range: self.v_range.as_deref().map(parse_v_range).transpose()?.or(file.v_range),
            span: self.span.as_deref().map(parse_span).transpose()?.or(file.span),
            ic: self.ic.as_deref().map(parse_ic).transpose()?.or(file.ic),
            rel_tol: self.rel_tol.or(file.rel_tol),
            abs_tol: self.abs_tol.or(file.abs_tol),
            sample_interval: self.sample_interval.or(file.sample_interval),
            transient,
            out: self.out.clone(),
            formats,
            embed_dim,
            fp_index: self.fp_index,
            workers: self.workers,
            simulate: self.simulate,
        })
    }
}
