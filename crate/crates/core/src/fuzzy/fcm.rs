//! One-dimensional fuzzy c-means and the cluster-merging procedure that turns
//! nine fitted clusters into three data-driven membership functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::membership::{MembershipFunction, TermSet};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FcmParams {
    pub clusters: usize,
    /// Fuzzifier exponent `m > 1`.
    pub fuzzifier: f64,
    /// Stop once no center moves more than this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FcmParams {
    fn default() -> Self {
        Self {
            clusters: 9,
            fuzzifier: 2.0,
            tol: 1e-6,
            max_iter: 300,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FcmResult {
    /// Cluster centers in increasing order.
    pub centers: Vec<f64>,
    /// Row-major `samples × clusters` membership matrix, columns aligned with `centers`.
    pub memberships: Vec<f64>,
    /// Objective after each iteration; the last entry is the final value.
    pub objective: Vec<f64>,
    pub iterations: usize,
}

impl FcmResult {
    pub fn clusters(&self) -> usize {
        self.centers.len()
    }

    pub fn membership(&self, sample: usize, cluster: usize) -> f64 {
        self.memberships[sample * self.clusters() + cluster]
    }

    pub fn final_objective(&self) -> f64 {
        *self.objective.last().expect("at least one iteration")
    }
}

/// Standard alternating fuzzy c-means on scalar samples.
///
/// Initial centers are drawn deterministically (given `seed`) from evenly
/// spaced quantile slots of the distinct sample values, so no two start equal.
pub fn fcm(samples: &[f64], params: &FcmParams, seed: u64) -> Result<FcmResult> {
    let c = params.clusters;
    if c < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 clusters, got {c}")));
    }
    if !(params.fuzzifier > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "fuzzifier must exceed 1, got {}",
            params.fuzzifier
        )));
    }
    if params.max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be positive".into()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite FCM sample".into()));
    }
    let mut distinct = samples.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < c {
        return Err(Error::TooFewDistinctSamples {
            distinct: distinct.len(),
            clusters: c,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_distinct = distinct.len() as f64;
    let mut centers: Vec<f64> = (0..c)
        .map(|k| {
            let slot = (k as f64 + rng.gen::<f64>()) * n_distinct / c as f64;
            distinct[(slot as usize).min(distinct.len() - 1)]
        })
        .collect();

    let n = samples.len();
    let m = params.fuzzifier;
    let mut u = vec![0.0; n * c];
    let mut objective = Vec::new();
    let mut iterations = 0;
    for _ in 0..params.max_iter {
        iterations += 1;
        update_memberships(samples, &centers, m, &mut u);
        let next = update_centers(samples, &u, c, m, &centers);
        objective.push(objective_value(samples, &u, &next, m));
        let shift = centers
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        centers = next;
        if shift < params.tol {
            break;
        }
    }

    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| centers[a].total_cmp(&centers[b]));
    let sorted_centers = order.iter().map(|&k| centers[k]).collect();
    let mut sorted_u = vec![0.0; n * c];
    for i in 0..n {
        for (dst, &src) in order.iter().enumerate() {
            sorted_u[i * c + dst] = u[i * c + src];
        }
    }
    Ok(FcmResult {
        centers: sorted_centers,
        memberships: sorted_u,
        objective,
        iterations,
    })
}

/// `x^p`, using a multiply for the common square case.
fn pow(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else {
        x.powf(p)
    }
}

fn update_memberships(samples: &[f64], centers: &[f64], m: f64, u: &mut [f64]) {
    let c = centers.len();
    let exponent = 2.0 / (m - 1.0);
    let mut inv = vec![0.0; c];
    for (i, &x) in samples.iter().enumerate() {
        let row = &mut u[i * c..(i + 1) * c];
        let zeros = centers.iter().filter(|&&v| x == v).count();
        if zeros > 0 {
            for (uk, &v) in row.iter_mut().zip(centers) {
                *uk = if x == v { 1.0 / zeros as f64 } else { 0.0 };
            }
            continue;
        }
        // u_k = 1 / sum_j (d_k / d_j)^p = d_k^-p / sum_j d_j^-p
        for (w, &v) in inv.iter_mut().zip(centers) {
            *w = 1.0 / pow((x - v).abs(), exponent);
        }
        let total: f64 = inv.iter().sum();
        for (uk, &w) in row.iter_mut().zip(&inv) {
            *uk = w / total;
        }
    }
}

fn update_centers(samples: &[f64], u: &[f64], c: usize, m: f64, previous: &[f64]) -> Vec<f64> {
    let mut num = vec![0.0; c];
    let mut den = vec![0.0; c];
    for (i, &x) in samples.iter().enumerate() {
        for k in 0..c {
            let w = pow(u[i * c + k], m);
            num[k] += w * x;
            den[k] += w;
        }
    }
    (0..c)
        .map(|k| if den[k] > 0.0 { num[k] / den[k] } else { previous[k] })
        .collect()
}

fn objective_value(samples: &[f64], u: &[f64], centers: &[f64], m: f64) -> f64 {
    let c = centers.len();
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            (0..c)
                .map(|k| pow(u[i * c + k], m) * (x - centers[k]).powi(2))
                .sum::<f64>()
        })
        .sum()
}

/// A membership-weighted Gaussian fitted to one cluster or merged group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianFit {
    pub mean: f64,
    pub std: f64,
    /// Total membership mass of the group.
    pub mass: f64,
}

impl GaussianFit {
    /// Bhattacharyya coefficient between two normal densities, in `[0, 1]`.
    pub fn overlap(&self, other: &GaussianFit) -> f64 {
        let (s1, s2) = (self.std.max(1e-12), other.std.max(1e-12));
        let var_sum = s1 * s1 + s2 * s2;
        (2.0 * s1 * s2 / var_sum).sqrt() * (-(self.mean - other.mean).powi(2) / (4.0 * var_sum)).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MergeParams {
    /// Minimum share of total membership mass each final group must keep.
    pub min_group_mass: f64,
    /// Smallest standard deviation used when shaping membership functions.
    pub min_sigma: f64,
}

impl Default for MergeParams {
    fn default() -> Self {
        Self {
            min_group_mass: 0.15,
            min_sigma: 0.01,
        }
    }
}

/// Result of fitting the edge-concentration terms, with the intermediate fits.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeTermFit {
    pub terms: TermSet,
    pub clusters: Vec<GaussianFit>,
    pub groups: Vec<GaussianFit>,
    /// For each final group, the indices (into `clusters`) it absorbed.
    pub members: Vec<Vec<usize>>,
}

fn weighted_fit(samples: &[f64], weights: impl Fn(usize) -> f64) -> GaussianFit {
    let (mut mass, mut sum) = (0.0, 0.0);
    for (i, &x) in samples.iter().enumerate() {
        let w = weights(i);
        mass += w;
        sum += w * x;
    }
    let mean = if mass > 0.0 { sum / mass } else { 0.0 };
    let var = if mass > 0.0 {
        samples
            .iter()
            .enumerate()
            .map(|(i, &x)| weights(i) * (x - mean).powi(2))
            .sum::<f64>()
            / mass
    } else {
        0.0
    };
    GaussianFit {
        mean,
        std: var.sqrt(),
        mass,
    }
}

// can `masses` (contiguous) still be cut into `parts` runs each holding >= floor?
fn can_partition(masses: &[f64], parts: usize, floor: f64) -> bool {
    if parts == 0 {
        return masses.is_empty();
    }
    if masses.len() < parts {
        return false;
    }
    if parts == 1 {
        return masses.iter().sum::<f64>() >= floor;
    }
    let mut head = 0.0;
    for cut in 1..=masses.len() - (parts - 1) {
        head += masses[cut - 1];
        if head >= floor && can_partition(&masses[cut..], parts - 1, floor) {
            return true;
        }
    }
    false
}

/// Derives low/medium/high terms for edge concentration from pooled samples.
///
/// Clusters the samples with [`fcm`], fits a membership-weighted Gaussian to
/// each cluster, then repeatedly merges the most-overlapping adjacent pair
/// until three groups remain. A merge is skipped if afterwards the groups
/// could no longer be cut into three runs that each keep `min_group_mass` of
/// the total mass; if every candidate is skipped the most-overlapping pair is
/// merged anyway.
pub fn build_edge_mfs(
    samples: &[f64],
    fcm_params: &FcmParams,
    merge: &MergeParams,
    seed: u64,
) -> Result<EdgeTermFit> {
    const GROUPS: usize = 3;
    if fcm_params.clusters < GROUPS {
        return Err(Error::InvalidParameter(format!(
            "need at least {GROUPS} clusters to form three terms"
        )));
    }
    let result = fcm(samples, fcm_params, seed)?;
    let c = result.clusters();
    let clusters: Vec<GaussianFit> = (0..c)
        .map(|k| weighted_fit(samples, |i| result.membership(i, k)))
        .collect();
    let total: f64 = clusters.iter().map(|g| g.mass).sum();
    let floor = merge.min_group_mass * total;

    let mut members: Vec<Vec<usize>> = (0..c).map(|k| vec![k]).collect();
    let fit_of = |group: &[usize]| {
        weighted_fit(samples, |i| group.iter().map(|&k| result.membership(i, k)).sum())
    };
    let mut groups = clusters.clone();
    while groups.len() > GROUPS {
        let mut candidates: Vec<(usize, f64)> = (0..groups.len() - 1)
            .map(|j| (j, groups[j].overlap(&groups[j + 1])))
            .collect();
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let admissible = candidates.iter().find(|&&(j, _)| {
            let mut masses: Vec<f64> = groups.iter().map(|g| g.mass).collect();
            masses[j] += masses[j + 1];
            masses.remove(j + 1);
            can_partition(&masses, GROUPS, floor)
        });
        let j = admissible.unwrap_or(&candidates[0]).0;
        let absorbed = members.remove(j + 1);
        members[j].extend(absorbed);
        groups[j] = fit_of(&members[j]);
        groups.remove(j + 1);
    }

    let terms = terms_from_groups(&groups, merge.min_sigma);
    Ok(EdgeTermFit {
        terms,
        clusters,
        groups,
        members,
    })
}

fn terms_from_groups(groups: &[GaussianFit], min_sigma: f64) -> TermSet {
    let (lo, mid, hi) = (groups[0], groups[1], groups[2]);
    let sigma = |g: &GaussianFit| g.std.max(min_sigma);
    // keep the terminal midpoints on the correct side of the medium peak
    let low_foot = (lo.mean + 2.0 * sigma(&lo)).min(2.0 * mid.mean - lo.mean - 1e-9);
    let high_foot = (hi.mean - 2.0 * sigma(&hi)).max(2.0 * mid.mean - hi.mean + 1e-9);
    TermSet {
        low: MembershipFunction::ZShaped {
            shoulder: lo.mean,
            foot: low_foot.max(lo.mean),
        },
        medium: MembershipFunction::Gaussian {
            mu: mid.mean,
            sigma: sigma(&mid),
        },
        high: MembershipFunction::SShaped {
            foot: high_foot.min(hi.mean),
            shoulder: hi.mean,
        },
    }
}
