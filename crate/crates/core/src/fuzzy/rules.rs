use std::fmt;

use serde::{Deserialize, Serialize};

use super::membership::{Label, TermSet};
use crate::error::{Error, Result};

/// Condition on one input inside a rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Antecedent {
    Low,
    Medium,
    High,
    NotLow,
    NotHigh,
    Any,
}

impl Antecedent {
    pub fn matches(self, label: Label) -> bool {
        match self {
            Antecedent::Low => label == Label::Low,
            Antecedent::Medium => label == Label::Medium,
            Antecedent::High => label == Label::High,
            Antecedent::NotLow => label != Label::Low,
            Antecedent::NotHigh => label != Label::High,
            Antecedent::Any => true,
        }
    }

    /// Degree to which `x` satisfies the condition.
    pub fn degree(self, terms: &TermSet, x: f64) -> f64 {
        match self {
            Antecedent::Low => terms.membership(Label::Low, x),
            Antecedent::Medium => terms.membership(Label::Medium, x),
            Antecedent::High => terms.membership(Label::High, x),
            Antecedent::NotLow => 1.0 - terms.membership(Label::Low, x),
            Antecedent::NotHigh => 1.0 - terms.membership(Label::High, x),
            Antecedent::Any => 1.0,
        }
    }
}

/// Output strength labels, weakest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    VeryWeak,
    Weak,
    Moderate,
    Strong,
    VeryStrong,
}

impl Strength {
    pub const ALL: [Strength; 5] = [
        Strength::VeryWeak,
        Strength::Weak,
        Strength::Moderate,
        Strength::Strong,
        Strength::VeryStrong,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Strength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strength::VeryWeak => "very_weak",
            Strength::Weak => "weak",
            Strength::Moderate => "moderate",
            Strength::Strong => "strong",
            Strength::VeryStrong => "very_strong",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rule {
    pub saliency: Antecedent,
    pub edge: Antecedent,
    pub intensity: Antecedent,
    pub output: Strength,
}

impl Rule {
    pub fn matches(&self, saliency: Label, edge: Label, intensity: Label) -> bool {
        self.saliency.matches(saliency) && self.edge.matches(edge) && self.intensity.matches(intensity)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RuleBase {
    pub rules: Vec<Rule>,
}

impl RuleBase {
    /// Consequents of all rules matching an atomic label triple.
    pub fn consequents(&self, saliency: Label, edge: Label, intensity: Label) -> Vec<Strength> {
        self.rules
            .iter()
            .filter(|r| r.matches(saliency, edge, intensity))
            .map(|r| r.output)
            .collect()
    }

    /// Every one of the 27 atomic triples must be matched by exactly one rule.
    pub fn validate(&self) -> Result<()> {
        for s in Label::ALL {
            for e in Label::ALL {
                for i in Label::ALL {
                    let hits = self.consequents(s, e, i);
                    if hits.len() != 1 {
                        return Err(Error::Config(format!(
                            "rule base covers (saliency={s:?}, edge={e:?}, intensity={i:?}) \
                             {} times, expected once",
                            hits.len()
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
