//! Serializable summaries of analysis, simulation and diagnostics runs.
//!
//! Every report has a structured JSON form that parses back to an equal value,
//! and a flat `key = value` text form for reading.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::integrate::{IntegrationOptions, OscillationSummary, StepStats, Termination};
use crate::model::{FixedPoint, ModelSpec, SystemId};
use crate::stability::{HopfAnalysis, SpeedReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub system: Option<SystemId>,
    pub parameters: BTreeMap<String, f64>,
}

impl ModelSummary {
    pub fn of(spec: &ModelSpec) -> Self {
        Self {
            system: spec.system(),
            parameters: spec.params().iter().map(|(p, v)| (p.key().to_string(), v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub model: ModelSummary,
    pub v: f64,
    pub fixed_points: Vec<FixedPoint>,
    pub selected_fixed_point: usize,
    pub speed: SpeedReport,
    pub hopf: HopfAnalysis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub model: ModelSummary,
    pub v: f64,
    pub fixed_point: FixedPoint,
    pub options: IntegrationOptions,
    pub termination: Termination,
    pub stats: StepStats,
    pub samples: usize,
    pub transient_fraction: f64,
    pub summary: Option<OscillationSummary>,
    /// Why `summary` is absent.
    pub summary_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub segment_length: usize,
    pub segments: usize,
    pub peak_frequency: f64,
    pub total_power: f64,
    pub variance: f64,
    pub flatness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfSummary {
    pub max_lag: usize,
    /// First lag, in ζ units, where the ACF drops below 0.2.
    pub decorrelation_length: Option<f64>,
    /// Largest ACF value after the first drop below 0.2.
    pub max_after_decorrelation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractalSummary {
    pub embed_dim: usize,
    pub points: usize,
    pub reference_points: usize,
    pub dimension: Option<f64>,
    pub plateau_range: Option<(f64, f64)>,
    pub cluster_prefactor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub model: ModelSummary,
    pub v: f64,
    pub samples: usize,
    pub transient_fraction: f64,
    pub spectrum: SpectrumSummary,
    pub acf: AcfSummary,
    pub fractal: FractalSummary,
}

impl AcfSummary {
    pub fn from_acf(acf: &[f64], dzeta: f64) -> Self {
        let first = acf.iter().position(|&r| r < 0.2);
        Self {
            max_lag: acf.len().saturating_sub(1),
            decorrelation_length: first.map(|k| k as f64 * dzeta),
            max_after_decorrelation: first
                .and_then(|k| acf[k..].iter().copied().reduce(f64::max)),
        }
    }
}

/// Structured form: pretty-printed JSON.
pub fn to_json<T: Serialize>(report: &T) -> String {
    serde_json::to_string_pretty(report).expect("reports serialize to JSON")
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, serde_json::Error> {
    serde_json::from_str(text)
}

/// Flat `key = value` lines with dotted paths, e.g. `hopf.v_plus = 2`.
pub fn to_text<T: Serialize>(report: &T) -> String {
    let value = serde_json::to_value(report).expect("reports serialize to JSON");
    let mut out = String::new();
    flatten("", &value, &mut out);
    out
}

fn flatten(prefix: &str, value: &Value, out: &mut String) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&join(k), v, out);
            }
        }
        Value::Array(items) if items.iter().all(|v| v.is_number()) => {
            let parts: Vec<String> = items.iter().map(Value::to_string).collect();
            out.push_str(&format!("{prefix} = [{}]\n", parts.join(", ")));
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, out);
            }
        }
        Value::Null => out.push_str(&format!("{prefix} = none\n")),
        Value::String(s) => out.push_str(&format!("{prefix} = {s}\n")),
        other => out.push_str(&format!("{prefix} = {other}\n")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fixed_points, make_preset};
    use crate::stability::{analyze_hopf, analyze_speed};

    fn analysis(id: SystemId, v: f64) -> AnalysisReport {
        let spec = make_preset(id, &[]).unwrap();
        let fps = fixed_points(&spec).unwrap();
        let fp = fps[0];
        AnalysisReport {
            model: ModelSummary::of(&spec),
            v,
            fixed_points: fps,
            selected_fixed_point: 0,
            speed: analyze_speed(&spec, &fp, v).unwrap(),
            hopf: analyze_hopf(&spec, &fp).unwrap(),
        }
    }

    #[test]
    fn analysis_round_trips() {
        for (id, v) in [(SystemId::A, 0.1), (SystemId::B, 2.0), (SystemId::D, -0.2), (SystemId::E, 1.8)] {
            let r = analysis(id, v);
            let back: AnalysisReport = from_json(&to_json(&r)).unwrap();
            assert_eq!(back, r);
        }
    }

    #[test]
    fn text_form() {
        let text = to_text(&analysis(SystemId::B, 2.0));
        assert!(text.contains("model.system = B\n"));
        assert!(text.contains("hopf.regime = a\n"));
        assert!(text.contains("model.parameters.D1 = 1.0\n"));
        assert!(text.contains("fixed_points.0.n0 = 1.0\n"));
        assert!(text.lines().all(|l| l.contains(" = ")));
    }

    #[test]
    fn acf_summary() {
        let s = AcfSummary::from_acf(&[1.0, 0.5, 0.1, 0.3, -0.2], 0.5);
        assert_eq!(s.decorrelation_length, Some(1.0));
        assert_eq!(s.max_after_decorrelation, Some(0.3));
        assert_eq!(AcfSummary::from_acf(&[1.0, 0.9], 0.5).decorrelation_length, None);
    }
}
