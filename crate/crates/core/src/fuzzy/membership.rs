use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Membership function shapes used by the strength system.
///
/// `SShaped` rises from 0 at `foot` to 1 at `shoulder`; `ZShaped` is its
/// mirror, 1 up to `shoulder` and 0 from `foot` on. Both use the quadratic
/// spline of the classic `smf`/`zmf` definitions. When `foot == shoulder`
/// they degenerate to a step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MembershipFunction {
    Gaussian { mu: f64, sigma: f64 },
    SShaped { foot: f64, shoulder: f64 },
    ZShaped { shoulder: f64, foot: f64 },
}

impl MembershipFunction {
    pub fn evaluate(&self, x: f64) -> f64 {
        match *self {
            MembershipFunction::Gaussian { mu, sigma } => {
                if sigma <= 0.0 {
                    return if x == mu { 1.0 } else { 0.0 };
                }
                (-(x - mu).powi(2) / (2.0 * sigma * sigma)).exp()
            }
            MembershipFunction::SShaped { foot, shoulder } => s_curve(x, foot, shoulder),
            MembershipFunction::ZShaped { shoulder, foot } => 1.0 - s_curve(x, shoulder, foot),
        }
    }

    /// Peak for Gaussians, foot/shoulder midpoint for the terminal shapes.
    pub fn center(&self) -> f64 {
        match *self {
            MembershipFunction::Gaussian { mu, .. } => mu,
            MembershipFunction::SShaped { foot, shoulder } => 0.5 * (foot + shoulder),
            MembershipFunction::ZShaped { shoulder, foot } => 0.5 * (foot + shoulder),
        }
    }

    /// A point where the function reaches 1.
    pub fn peak(&self) -> f64 {
        match *self {
            MembershipFunction::Gaussian { mu, .. } => mu,
            MembershipFunction::SShaped { shoulder, .. } => shoulder,
            MembershipFunction::ZShaped { shoulder, .. } => shoulder,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            MembershipFunction::Gaussian { mu, sigma } => mu.is_finite() && sigma > 0.0,
            MembershipFunction::SShaped { foot, shoulder } => {
                foot.is_finite() && shoulder.is_finite() && foot <= shoulder
            }
            MembershipFunction::ZShaped { shoulder, foot } => {
                foot.is_finite() && shoulder.is_finite() && shoulder <= foot
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid membership function {self:?}")))
        }
    }
}

// 0 below a, 1 above b, quadratic spline in between
fn s_curve(x: f64, a: f64, b: f64) -> f64 {
    if x <= a {
        0.0
    } else if x >= b {
        1.0
    } else {
        let mid = 0.5 * (a + b);
        let span = b - a;
        if x <= mid {
            2.0 * ((x - a) / span).powi(2)
        } else {
            1.0 - 2.0 * ((x - b) / span).powi(2)
        }
    }
}

/// Linguistic label of an input term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Low,
    Medium,
    High,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Low, Label::Medium, Label::High];
}

/// Low/medium/high membership functions of one input variable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSet {
    pub low: MembershipFunction,
    pub medium: MembershipFunction,
    pub high: MembershipFunction,
}

impl TermSet {
    pub fn get(&self, label: Label) -> &MembershipFunction {
        match label {
            Label::Low => &self.low,
            Label::Medium => &self.medium,
            Label::High => &self.high,
        }
    }

    pub fn membership(&self, label: Label, x: f64) -> f64 {
        self.get(label).evaluate(x)
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        for l in Label::ALL {
            self.get(l).validate()?;
        }
        let (lo, mid, hi) = (self.low.center(), self.medium.center(), self.high.center());
        if !(lo < mid && mid < hi) {
            return Err(Error::Config(format!(
                "{name} terms out of order: centers {lo:.4}, {mid:.4}, {hi:.4}"
            )));
        }
        Ok(())
    }
}
