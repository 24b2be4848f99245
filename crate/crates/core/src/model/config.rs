//! Flat key-value model configs.
//!
//! ```text
//! system = "B"
//! alpha = -1.2
//! D2 = 2.0
//! ```
//!
//! Keys other than `system` are parameter keys ([`Param::key`]). Values not
//! given fall back to the preset defaults.

use std::str::FromStr;

use super::{make_preset, preset_parameters, ModelSpec, Param, SystemId};
use crate::error::ModelError;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub system: SystemId,
    pub overrides: Vec<(Param, f64)>,
}

impl ModelConfig {
    pub fn new(system: SystemId) -> Self {
        Self { system, overrides: Vec::new() }
    }

    /// Sets (or replaces) an override. Overrides are kept in [`Param::ALL`] order.
    pub fn set(&mut self, param: Param, value: f64) {
        match self.overrides.binary_search_by(|(p, _)| p.cmp(&param)) {
            Ok(i) => self.overrides[i].1 = value,
            Err(i) => self.overrides.insert(i, (param, value)),
        }
    }

    pub fn build(&self) -> Result<ModelSpec, ModelError> {
        make_preset(self.system, &self.overrides)
    }

    /// Config carrying every free parameter of a preset-derived model.
    pub fn from_spec(spec: &ModelSpec) -> Result<Self, ModelError> {
        let system = spec
            .system()
            .ok_or_else(|| ModelError::Config("only preset-derived models have a config form".into()))?;
        let mut config = Self::new(system);
        for &(p, _) in preset_parameters(system) {
            config.set(p, spec.param(p)?);
        }
        Ok(config)
    }

    pub fn to_config_string(&self) -> String {
        let mut out = format!("system = \"{}\"\n", self.system);
        for (p, v) in &self.overrides {
            // Debug formatting of f64 round-trips exactly.
            out.push_str(&format!("{} = {:?}\n", p.key(), v));
        }
        out
    }
}

impl FromStr for ModelConfig {
    type Err = ModelError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ModelError::Config(e.to_string()))?;
        let system = match table.get("system") {
            Some(toml::Value::String(s)) => s.parse::<SystemId>()?,
            Some(_) => return Err(ModelError::Config("`system` must be a string".into())),
            None => return Err(ModelError::Config("missing `system` key".into())),
        };
        let mut config = Self::new(system);
        for (key, value) in &table {
            if key == "system" {
                continue;
            }
            let param = key.parse::<Param>()?;
            let value = match value {
                toml::Value::Float(x) => *x,
                toml::Value::Integer(i) => *i as f64,
                _ => return Err(ModelError::Config(format!("`{key}` must be a number"))),
            };
            config.set(param, value);
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_build() {
        let cfg: ModelConfig = "system = \"E\"\nalpha = 1.7\nD1 = -1\n".parse().unwrap();
        assert_eq!(cfg.system, SystemId::E);
        let spec = cfg.build().unwrap();
        assert_eq!(spec.alpha(), 1.7);
        assert_eq!(spec.d1(), -1.0);
    }

    #[test]
    fn round_trip_through_text() {
        for id in SystemId::ALL {
            let spec = make_preset(id, &[(Param::D1, 0.75)]).unwrap();
            let cfg = ModelConfig::from_spec(&spec).unwrap();
            let back: ModelConfig = cfg.to_config_string().parse().unwrap();
            assert_eq!(back.build().unwrap().params(), spec.params());
        }
    }

    #[test]
    fn errors() {
        assert!(matches!("alpha = 1".parse::<ModelConfig>(), Err(ModelError::Config(_))));
        assert!(matches!("system = \"Q\"".parse::<ModelConfig>(), Err(ModelError::UnknownSystem(_))));
        assert!(matches!(
            "system = \"A\"\nfoo = 1".parse::<ModelConfig>(),
            Err(ModelError::UnknownParameter(_))
        ));
        assert!(matches!("system = \"A\"\nalpha = \"x\"".parse::<ModelConfig>(), Err(ModelError::Config(_))));
        let cfg: ModelConfig = "system = \"A\"\neps_tilde = 1".parse().unwrap();
        assert!(matches!(cfg.build(), Err(ModelError::FixedByPreset { .. })));
    }
}
