use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use switchheat::hybrid::PullbackOptions;
use switchheat::spectral::{Example, ModelParams};

use crate::error::CliError;

/// Everything a run needs. A config file must name every key; flags then
/// override single keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub example: Example,
    pub r0: f64,
    pub r1: f64,
    #[serde(rename = "D")]
    pub diffusivity: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub b: f64,
    #[serde(rename = "K")]
    pub modes: usize,
    #[serde(rename = "N")]
    pub samples: usize,
    pub seed: u64,
    /// Number of grid intervals; fields are evaluated at the `G − 1` interior nodes.
    #[serde(rename = "G")]
    pub grid: usize,
    pub tol: f64,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = ModelParams::default();
        RunConfig {
            example: Example::Dd,
            r0: p.r0,
            r1: p.r1,
            diffusivity: p.diffusivity,
            length: p.length,
            b: p.b,
            modes: p.modes,
            samples: 10_000,
            seed: 0,
            grid: 64,
            tol: PullbackOptions::default().tol,
            output: PathBuf::from("switchheat-out"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Replaces the value of `key`. `raw` is read as JSON when it parses and
    /// as a string otherwise, so `--example dn` and `--r0 2.5` both work.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), CliError> {
        let mut doc = serde_json::to_value(&*self).expect("config serializes");
        let slot = doc
            .get_mut(key)
            .ok_or_else(|| CliError::Usage(format!("unknown config key {key}")))?;
        *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        *self = serde_json::from_value(doc).map_err(|e| CliError::Usage(format!("--{key} {raw}: {e}")))?;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model().validate()?;
        if self.samples == 0 {
            return Err(CliError::Usage("N must be at least 1".into()));
        }
        if self.grid < 2 {
            return Err(CliError::Usage(format!("G must be at least 2, got {}", self.grid)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Usage(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn model(&self) -> ModelParams {
        ModelParams {
            r0: self.r0,
            r1: self.r1,
            diffusivity: self.diffusivity,
            length: self.length,
            b: self.b,
            modes: self.modes,
        }
    }

    pub fn pullback(&self) -> PullbackOptions {
        PullbackOptions {
            tol: self.tol,
            ..PullbackOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let mut c = RunConfig::default();
        c.set("example", "dn").unwrap();
        c.set("r0", "0.3").unwrap();
        c.set("output", "some/dir").unwrap();
        let back = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(RunConfig::from_json(&back.to_json()).unwrap(), back);
    }

    #[test]
    fn unknown_and_missing_keys_are_rejected() {
        let mut doc: Value = serde_json::from_str(&RunConfig::default().to_json()).unwrap();
        doc["extra"] = Value::from(1);
        assert!(matches!(RunConfig::from_json(&doc.to_string()), Err(CliError::Usage(_))));
        doc.as_object_mut().unwrap().remove("extra");
        doc.as_object_mut().unwrap().remove("tol");
        assert!(matches!(RunConfig::from_json(&doc.to_string()), Err(CliError::Usage(_))));
    }

    #[test]
    fn overrides_are_typed() {
        let mut c = RunConfig::default();
        assert!(c.set("K", "many").is_err());
        assert!(c.set("example", "ode2d").is_err());
        assert!(c.set("nope", "1").is_err());
        c.set("K", "16").unwrap();
        assert_eq!(c.modes, 16);
    }

    #[test]
    fn nonpositive_parameters_are_rejected() {
        for (key, raw) in [("r0", "0"), ("D", "-1"), ("N", "0"), ("G", "1"), ("tol", "0"), ("K", "0")] {
            let mut c = RunConfig::default();
            c.set(key, raw).unwrap();
            assert!(c.validate().is_err(), "{key}={raw}");
        }
    }
}
