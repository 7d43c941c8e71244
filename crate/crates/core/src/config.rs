use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linework::{DogParams, DEFAULT_NEDT_TAU};
use crate::mining::{NaiveSsimFilter, PanParams, DEFAULT_MIN_NORM, DEFAULT_RRLD_THRESHOLD};
use crate::warp::DEFAULT_OPEN_KERNEL;

/// Tunables shared by all subcommands, loaded from TOML. Missing keys take
/// their defaults; unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub rrld_threshold: f64,
    pub min_norm: f64,
    pub dog: DogParams,
    pub nedt_tau: f64,
    pub open_kernel: usize,
    pub pan: PanParams,
    pub naive: NaiveSsimFilter,
    /// Thread count; `None` means one per logical core.
    pub workers: Option<usize>,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            rrld_threshold: DEFAULT_RRLD_THRESHOLD,
            min_norm: DEFAULT_MIN_NORM,
            dog: DogParams::default(),
            nedt_tau: DEFAULT_NEDT_TAU,
            open_kernel: DEFAULT_OPEN_KERNEL,
            pan: PanParams::default(),
            naive: NaiveSsimFilter::default(),
            workers: None,
            seed: 0,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::format(path, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        self.dog.validate()?;
        if !(self.rrld_threshold.is_finite() && self.rrld_threshold > 0.0) {
            return bad("rrld_threshold must be positive");
        }
        if !(self.min_norm.is_finite() && self.min_norm >= 0.0) {
            return bad("min_norm must be non-negative");
        }
        if !(self.nedt_tau.is_finite() && self.nedt_tau > 0.0) {
            return bad("nedt_tau must be positive");
        }
        if self.open_kernel == 0 || self.open_kernel.is_multiple_of(2) {
            return bad("open_kernel must be odd");
        }
        if self.naive.low > self.naive.high {
            return bad("naive.low must not exceed naive.high");
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1");
        }
        Ok(())
    }
}
