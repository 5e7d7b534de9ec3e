//! Optional TOML run configuration. Command-line flags take precedence over every key.

use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub jobs: Option<usize>,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub sample: SampleSection,
    #[serde(default)]
    pub hfox: HfoxSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub suite: Option<String>,
    pub seeds: Option<Vec<u64>>,
    pub samples: Option<usize>,
    pub alpha: Option<f64>,
    pub covariance_samples: Option<usize>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub t: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HfoxSection {
    pub tol: Option<f64>,
}

pub enum ConfigError {
    Io(String),
    Invalid(String),
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
        cfg.check().map_err(ConfigError::Invalid)?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), String> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if x.is_nan() || x <= 0.0 => Err(format!("`{name}` must be positive")),
            _ => Ok(()),
        };
        positive("jobs", self.jobs.map(|v| v as f64))?;
        positive("verify.samples", self.verify.samples.map(|v| v as f64))?;
        positive("verify.alpha", self.verify.alpha)?;
        positive("verify.covariance_samples", self.verify.covariance_samples.map(|v| v as f64))?;
        positive("sample.n", self.sample.n.map(|v| v as f64))?;
        positive("sample.t", self.sample.t)?;
        positive("hfox.tol", self.hfox.tol)?;
        if matches!(&self.verify.seeds, Some(s) if s.is_empty()) {
            return Err("`verify.seeds` must not be empty".into());
        }
        Ok(())
    }
}
