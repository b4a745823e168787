//! JSON run configuration shared by all subcommands.

use std::path::{Path, PathBuf};

use fuzzmark_core::features::FeatureConfig;
use fuzzmark_core::fuzzy::FisConfig;
use fuzzmark_core::{Attack, EmbedConfig, WatermarkConfig};
use serde::{Deserialize, Serialize};

use crate::bench::default_attacks;
use crate::error::{CliError, Result, StageExt};

fn default_trials() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub cover: Option<PathBuf>,
    pub payload: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Path to a fuzzy inference system description; the bundled one is used when absent.
    pub fis: Option<PathBuf>,
    pub features: FeatureConfig,
    pub embed: EmbedConfig,
    /// Attack list for `bench`; `None` selects the full default suite.
    pub attacks: Option<Vec<Attack>>,
    pub images: Vec<PathBuf>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub seed: u64,
    pub report: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cover: None,
            payload: None,
            output: None,
            fis: None,
            features: FeatureConfig::default(),
            embed: EmbedConfig::default(),
            attacks: None,
            images: Vec::new(),
            trials: default_trials(),
            seed: 0,
            report: None,
        }
    }
}

impl RunConfig {
    /// Reads a configuration file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(fuzzmark_core::Error::from)
            .stage("config")?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.cover, &mut self.payload, &mut self.output, &mut self.fis, &mut self.report]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        self.images.iter_mut().for_each(fix);
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(CliError::Usage("trial count must be at least 1".into()));
        }
        for path in [&self.cover, &self.payload, &self.fis].into_iter().flatten().chain(&self.images) {
            if !path.exists() {
                return Err(CliError::Io {
                    path: path.clone(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
                });
            }
        }
        self.features.canny.validate().stage("config")?;
        self.embed.validate().stage("config")?;
        for attack in self.attacks() {
            attack.validate().stage("config")?;
        }
        Ok(())
    }

    pub fn attacks(&self) -> Vec<Attack> {
        self.attacks.clone().unwrap_or_else(default_attacks)
    }

    pub fn watermark_config(&self) -> Result<WatermarkConfig> {
        let fis = match &self.fis {
            Some(path) => FisConfig::load(path).stage("fuzzy config")?,
            None => FisConfig::default(),
        };
        let cfg = WatermarkConfig {
            features: self.features,
            fis,
            embed: self.embed,
        };
        cfg.validate().stage("config")?;
        Ok(cfg)
    }
}
