//! Experiment configuration, read from a TOML key-value file.

use std::path::{Path, PathBuf};

use hofa_core::additive::{QuadrupleConfig, RegularityConfig};
use hofa_core::equidist::EquidistConfig;
use hofa_core::fourier::FourierConfig;
use hofa_core::ratmod::is_prime;
use hofa_core::rbpl::RbplConfig;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("N = {0} is not prime")]
    NotPrime(u64),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Numerical tolerances of the Gowers-norm checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GowersTolerances {
    /// Relative tolerance for comparing norms.
    pub norm_rel: f64,
    /// Absolute tolerance for the counting identities.
    pub identity_abs: f64,
}

impl Default for GowersTolerances {
    fn default() -> Self {
        GowersTolerances { norm_rel: 1e-9, identity_abs: 1e-10 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub rbpl: RbplConfig,
    pub equidist: EquidistConfig,
    pub fourier: FourierConfig,
    pub bohr: RegularityConfig,
    pub quadruples: QuadrupleConfig,
    pub gowers: GowersTolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub d: usize,
    pub delta: f64,
    pub output_dir: Option<PathBuf>,
    pub thresholds: Thresholds,
}

pub const DEFAULT_SEED: u64 = 0x5EED_2024;

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: DEFAULT_SEED,
            n: 101,
            d: 2,
            delta: 0.1,
            output_dir: None,
            thresholds: Thresholds::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !is_prime(self.n) {
            return Err(ConfigError::NotPrime(self.n));
        }
        if self.d == 0 {
            return Err(ConfigError::Invalid("d must be positive".into()));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(ConfigError::Invalid(format!("delta = {} outside (0, 1]", self.delta)));
        }
        Ok(())
    }
}
