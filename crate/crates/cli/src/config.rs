use std::path::Path;

use figscan_core::augment::AugmentationConfig;
use figscan_core::induce::InduceConfig;
use figscan_core::raster::RandomSeed;
use figscan_core::MatchConfigF64;
use serde::{Deserialize, Serialize};

use crate::args::GlobalArgs;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    #[default]
    Micro,
    Macro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    pub confidence_threshold: f64,
    pub iou_threshold: f64,
    pub aggregation: Aggregation,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        let m = MatchConfigF64::default();
        Self {
            confidence_threshold: m.confidence_threshold,
            iou_threshold: m.iou_threshold,
            aggregation: Aggregation::Micro,
        }
    }
}

impl EvaluateConfig {
    pub fn match_config(&self) -> Result<MatchConfigF64, CliError> {
        MatchConfigF64::new(self.confidence_threshold, self.iou_threshold)
            .map_err(CliError::bad_input)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub seed: RandomSeed,
    /// Default fold count for `split --kind kfold`.
    pub k: Option<usize>,
}

/// Merged configuration: defaults, then the `--config` file, then flags.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub augment: AugmentationConfig,
    pub induce: InduceConfig,
    pub split: SplitConfig,
    pub evaluate: EvaluateConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(CliError::bad_input)
    }

    /// Fails only for seeds above `i64::MAX`, which TOML cannot hold.
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(CliError::bad_input)
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::bad_input(anyhow::anyhow!("cannot read config {}: {e}", p.display()))
                })?;
                Self::from_toml(&text).map_err(|e| {
                    CliError::bad_input(anyhow::anyhow!("config {}: {}", p.display(), e.source))
                })
            }
        }
    }

    pub fn apply_flags(&mut self, flags: &GlobalArgs) {
        if let Some(seed) = flags.seed {
            self.augment.seed = RandomSeed(seed);
            self.split.seed = RandomSeed(seed);
        }
        if let Some(dpi) = flags.dpi {
            self.induce.dpi = dpi;
        }
        if let Some(c) = flags.confidence_threshold {
            self.evaluate.confidence_threshold = c;
        }
        if let Some(i) = flags.iou_threshold {
            self.evaluate.iou_threshold = i;
        }
    }

    pub fn resolve(flags: &GlobalArgs) -> Result<Self, CliError> {
        let mut cfg = Self::load(flags.config.as_deref())?;
        cfg.apply_flags(flags);
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layering_defaults_file_flags() {
        let mut cfg = RunConfig::from_toml(
            "[augment]\nseed = 5\nblur_sigma = 0.7\n[evaluate]\niou_threshold = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.augment.seed, RandomSeed(5));
        assert_eq!(cfg.augment.blur_sigma, 0.7);
        assert_eq!(cfg.evaluate.confidence_threshold, 0.5);
        cfg.apply_flags(&GlobalArgs {
            seed: Some(9),
            iou_threshold: Some(0.7),
            ..GlobalArgs::default()
        });
        assert_eq!(cfg.augment.seed, RandomSeed(9));
        assert_eq!(cfg.split.seed, RandomSeed(9));
        assert_eq!(cfg.evaluate.iou_threshold, 0.7);
        assert_eq!(cfg.augment.blur_sigma, 0.7);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[augment]\nblur = 1\n").is_err());
        assert!(RunConfig::from_toml("[nope]\n").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }
}
