//! End-to-end embedding and extraction with a single configuration object.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::features::{extract_features, FeatureConfig, Features};
use crate::fuzzy::{strength_map, Fis, FisConfig};
use crate::image::{GrayImage, StrengthMap, WatermarkBits};
use crate::watermark::{self, EmbedConfig, RawExtraction};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WatermarkConfig {
    pub features: FeatureConfig,
    pub fis: FisConfig,
    pub embed: EmbedConfig,
}

impl WatermarkConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: WatermarkConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.features.canny.validate()?;
        self.fis.validate()?;
        self.embed.validate()
    }
}

/// Everything computed from a cover image before embedding.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub features: Features,
    pub fis: Fis,
    pub strength: StrengthMap,
}

/// Extracts features, fits the inference system (edge terms are trained on
/// the image's own edge concentration map) and computes the strength map.
pub fn analyze(img: &GrayImage, cfg: &WatermarkConfig) -> Result<Analysis> {
    let features = extract_features(img, &cfg.features)?;
    let fis = cfg.fis.build(features.edge.grid.cells())?;
    let strength = strength_map(&features.saliency, &features.edge, &features.intensity, &fis)?;
    Ok(Analysis {
        features,
        fis,
        strength,
    })
}

/// Embeds `bits` into `cover`, returning the real-valued marked image and the analysis.
pub fn embed(cover: &GrayImage, bits: &WatermarkBits, cfg: &WatermarkConfig) -> Result<(GrayImage, Analysis)> {
    cfg.validate()?;
    let analysis = analyze(cover, cfg)?;
    let marked = watermark::embed(cover, bits, &analysis.strength, &cfg.embed)?;
    Ok((marked, analysis))
}

/// Blind extraction followed by majority voting.
pub fn extract(img: &GrayImage, cfg: &EmbedConfig) -> Result<(WatermarkBits, RawExtraction)> {
    let raw = watermark::extract(img, cfg)?;
    Ok((watermark::vote(&raw, cfg.vote_threshold), raw))
}
