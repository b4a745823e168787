//! Mamdani fuzzy inference turning per-block features into embedding strength.
//!
//! Saliency and intensity use fixed membership functions from the
//! configuration; edge concentration terms are fitted from data with fuzzy
//! c-means unless the configuration pins them. Inference is min for AND,
//! clipping for implication, max for aggregation and centroid
//! defuzzification over a sampled output universe.

mod fcm;
mod membership;
mod rules;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use fcm::{build_edge_mfs, fcm, EdgeTermFit, FcmParams, FcmResult, GaussianFit, MergeParams};
pub use membership::{Label, MembershipFunction, TermSet};
pub use rules::{Antecedent, Rule, RuleBase, Strength};

use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::image::{BlockGrid, StrengthMap};

const DEFAULT_CONFIG: &str = include_str!("../../config/fis_default.json");

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputTerms {
    pub very_weak: MembershipFunction,
    pub weak: MembershipFunction,
    pub moderate: MembershipFunction,
    pub strong: MembershipFunction,
    pub very_strong: MembershipFunction,
}

impl OutputTerms {
    pub fn get(&self, s: Strength) -> &MembershipFunction {
        match s {
            Strength::VeryWeak => &self.very_weak,
            Strength::Weak => &self.weak,
            Strength::Moderate => &self.moderate,
            Strength::Strong => &self.strong,
            Strength::VeryStrong => &self.very_strong,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub universe: (f64, f64),
    pub samples: usize,
    pub terms: OutputTerms,
}

/// Serializable description of the whole inference system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FisConfig {
    pub saliency: TermSet,
    pub intensity: TermSet,
    /// Fixed edge-concentration terms; `None` fits them from training samples.
    pub edge: Option<TermSet>,
    pub output: OutputConfig,
    pub rules: RuleBase,
    #[serde(default)]
    pub fcm: FcmParams,
    #[serde(default)]
    pub merge: MergeParams,
    /// Seed for FCM center initialization.
    #[serde(default)]
    pub seed: u64,
}

impl Default for FisConfig {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_CONFIG).expect("bundled FIS configuration parses")
    }
}

impl FisConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: FisConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.saliency.validate("saliency")?;
        self.intensity.validate("intensity")?;
        if let Some(edge) = &self.edge {
            edge.validate("edge")?;
        }
        let (lo, hi) = self.output.universe;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!("invalid output universe [{lo}, {hi}]")));
        }
        if self.output.samples < 2 {
            return Err(Error::Config("output universe needs at least 2 samples".into()));
        }
        for s in Strength::ALL {
            self.output.terms.get(s).validate()?;
        }
        self.rules.validate()
    }

    /// Resolves the configuration into a runnable system.
    ///
    /// `edge_samples` feed the FCM fit when no fixed edge terms are configured.
    pub fn build(&self, edge_samples: &[f64]) -> Result<Fis> {
        self.validate()?;
        let edge = match self.edge {
            Some(t) => t,
            None => {
                let fit = build_edge_mfs(edge_samples, &self.fcm, &self.merge, self.seed)?;
                fit.terms.validate("edge")?;
                fit.terms
            }
        };
        Ok(Fis::new(self.saliency, edge, self.intensity, self.output, self.rules.clone()))
    }
}

/// Output membership function sampled on the output universe.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub xs: Vec<f64>,
    pub mu: Vec<f64>,
}

/// A fully specified inference system with pre-sampled output terms.
#[derive(Clone, Debug)]
pub struct Fis {
    pub saliency: TermSet,
    pub edge: TermSet,
    pub intensity: TermSet,
    pub rules: RuleBase,
    universe: (f64, f64),
    xs: Vec<f64>,
    sampled_terms: [Vec<f64>; 5],
}

impl Fis {
    pub fn new(
        saliency: TermSet,
        edge: TermSet,
        intensity: TermSet,
        output: OutputConfig,
        rules: RuleBase,
    ) -> Self {
        let (lo, hi) = output.universe;
        let n = output.samples;
        let xs: Vec<f64> = (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect();
        let sampled_terms = Strength::ALL.map(|s| {
            let mf = output.terms.get(s);
            xs.iter().map(|&x| mf.evaluate(x)).collect()
        });
        Self {
            saliency,
            edge,
            intensity,
            rules,
            universe: output.universe,
            xs,
            sampled_terms,
        }
    }

    pub fn universe(&self) -> (f64, f64) {
        self.universe
    }

    /// Clip level of each consequent: the max firing strength over its rules.
    pub fn consequent_levels(&self, saliency: f64, edge: f64, intensity: f64) -> [f64; 5] {
        let mut levels = [0.0f64; 5];
        for rule in &self.rules.rules {
            let firing = rule
                .saliency
                .degree(&self.saliency, saliency)
                .min(rule.edge.degree(&self.edge, edge))
                .min(rule.intensity.degree(&self.intensity, intensity));
            let slot = &mut levels[rule.output.index()];
            *slot = slot.max(firing);
        }
        levels
    }

    /// Mamdani min-max inference for one input triple.
    pub fn infer(&self, saliency: f64, edge: f64, intensity: f64) -> Aggregate {
        let levels = self.consequent_levels(saliency, edge, intensity);
        self.aggregate_levels(&levels)
    }

    pub fn aggregate_levels(&self, levels: &[f64; 5]) -> Aggregate {
        let mu = (0..self.xs.len())
            .map(|k| {
                levels
                    .iter()
                    .zip(&self.sampled_terms)
                    .map(|(&level, term)| term[k].min(level))
                    .fold(0.0, f64::max)
            })
            .collect();
        Aggregate {
            xs: self.xs.clone(),
            mu,
        }
    }

    /// Defuzzified strength for one block.
    pub fn strength(&self, saliency: f64, edge: f64, intensity: f64) -> f64 {
        defuzz_centroid(&self.infer(saliency, edge, intensity), self.universe.0)
    }
}

/// Mamdani inference with an explicit system; equivalent to [`Fis::infer`].
pub fn mamdani_infer(saliency: f64, edge: f64, intensity: f64, fis: &Fis) -> Aggregate {
    fis.infer(saliency, edge, intensity)
}

/// Centroid of a sampled aggregate; `fallback` when it carries no mass.
pub fn defuzz_centroid(aggregate: &Aggregate, fallback: f64) -> f64 {
    let (num, den) = aggregate
        .xs
        .iter()
        .zip(&aggregate.mu)
        .fold((0.0, 0.0), |(n, d), (&x, &m)| (n + x * m, d + m));
    if den > 0.0 {
        num / den
    } else {
        fallback
    }
}

/// Runs the inference cell by cell over three aligned feature maps.
pub fn strength_map(
    saliency: &FeatureMap,
    edge: &FeatureMap,
    intensity: &FeatureMap,
    fis: &Fis,
) -> Result<StrengthMap> {
    let (s, e, i) = (&saliency.grid, &edge.grid, &intensity.grid);
    if !(s.same_shape(e) && s.same_shape(i)) {
        return Err(Error::ShapeMismatch(format!(
            "feature maps {}x{}, {}x{}, {}x{}",
            s.rows(),
            s.cols(),
            e.rows(),
            e.cols(),
            i.rows(),
            i.cols()
        )));
    }
    let (lo, hi) = fis.universe();
    let cells = s
        .cells()
        .iter()
        .zip(e.cells())
        .zip(i.cells())
        .map(|((&sv, &ev), &iv)| fis.strength(sv, ev, iv).clamp(lo, hi))
        .collect();
    BlockGrid::new(s.rows(), s.cols(), cells)
}
