//! Robustness benchmark: embed once per image, then attack, extract and score.

use std::io::Write;
use std::path::{Path, PathBuf};

use fuzzmark_core::attacks::CropRegion;
use fuzzmark_core::{extract, load_image, Attack, GrayImage, MetricReport, WatermarkBits, WatermarkConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;

pub const CSV_HEADER: [&str; 10] = [
    "image", "attack", "params", "seed", "trial", "nc", "ber", "psnr", "mssim", "error",
];

/// Every attack setting exercised by a full benchmark run.
pub fn default_attacks() -> Vec<Attack> {
    let mut attacks = vec![Attack::None];
    for region in [CropRegion::Center, CropRegion::Around] {
        for fraction in [0.05, 0.10, 0.15, 0.20] {
            attacks.push(Attack::Crop {
                region,
                fraction,
                fill: 0,
            });
        }
    }
    for sigma in [0.5, 1.0, 2.0] {
        for size in [3, 5, 7] {
            attacks.push(Attack::GaussianFilter { size, sigma });
        }
    }
    for quality in [10, 20, 30, 40, 60, 75, 85, 95] {
        attacks.push(Attack::Jpeg { quality });
    }
    attacks.push(Attack::MedianFilter { size: 3 });
    for density in [0.01, 0.03, 0.05] {
        attacks.push(Attack::SaltPepper { density });
    }
    for sigma in [5.0, 10.0, 15.0, 20.0, 25.0, 30.0] {
        attacks.push(Attack::Awgn { sigma });
    }
    attacks
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one benchmark cell, independent of evaluation order.
pub fn trial_seed(master: u64, image: usize, attack: usize, trial: usize) -> u64 {
    [image as u64, attack as u64, trial as u64]
        .into_iter()
        .fold(splitmix64(master), |h, v| splitmix64(h ^ v))
}

/// Payload used when none is supplied.
pub fn default_payload(master: u64, len: usize) -> WatermarkBits {
    WatermarkBits::random(len, &mut ChaCha8Rng::seed_from_u64(master))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trial {
    Index(usize),
    Mean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub image: String,
    pub attack: Attack,
    pub seed: Option<u64>,
    pub trial: Trial,
    pub metrics: Option<MetricReport>,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub watermark: WatermarkConfig,
    pub attacks: Vec<Attack>,
    pub trials: usize,
    pub seed: u64,
    pub payload: Option<WatermarkBits>,
}

#[derive(Clone, Debug, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

fn fmt_metric(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".into()
    } else {
        format!("{v:.4}")
    }
}

impl BenchReport {
    pub fn means(&self) -> impl Iterator<Item = &BenchRow> {
        self.rows.iter().filter(|r| r.trial == Trial::Mean)
    }

    /// Mean row for an image/attack pair.
    pub fn mean(&self, image: &str, attack: &Attack) -> Option<&BenchRow> {
        self.means().find(|r| r.image == image && &r.attack == attack)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            let (nc, ber, psnr, mssim) = match &row.metrics {
                Some(m) => (fmt_metric(m.nc), fmt_metric(m.ber), fmt_metric(m.psnr), fmt_metric(m.mssim)),
                None => Default::default(),
            };
            let trial = match row.trial {
                Trial::Index(i) => i.to_string(),
                Trial::Mean => "mean".into(),
            };
            w.write_record([
                row.image.clone(),
                row.attack.name().to_string(),
                row.attack.params(),
                row.seed.map(|s| s.to_string()).unwrap_or_default(),
                trial,
                nc,
                ber,
                psnr,
                mssim,
                row.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| crate::error::CliError::Csv(e.into()))?;
        Ok(())
    }
}

fn image_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

struct Prepared {
    name: String,
    result: std::result::Result<(GrayImage, GrayImage), String>,
}

fn prepare(path: &Path, payload: &WatermarkBits, cfg: &WatermarkConfig) -> Prepared {
    let name = image_name(path);
    let result = load_image(path)
        .map_err(|e| format!("load: {e}"))
        .and_then(|cover| {
            let (marked, _) =
                fuzzmark_core::embed(&cover, payload, cfg).map_err(|e| format!("embed: {e}"))?;
            Ok((cover, marked.quantized()))
        });
    Prepared { name, result }
}

fn run_cell(
    prepared: &Prepared,
    attack: &Attack,
    seed: u64,
    payload: &WatermarkBits,
    cfg: &WatermarkConfig,
) -> std::result::Result<MetricReport, String> {
    let (cover, marked) = prepared.result.as_ref().map_err(Clone::clone)?;
    let attacked = attack.apply(marked, seed).map_err(|e| format!("attack: {e}"))?;
    let (recovered, _) = extract(&attacked, &cfg.embed).map_err(|e| format!("extract: {e}"))?;
    MetricReport::compute(cover, &attacked, payload, &recovered).map_err(|e| format!("metrics: {e}"))
}

fn mean_row(image: &str, attack: Attack, trials: &[BenchRow]) -> BenchRow {
    let ok: Vec<&MetricReport> = trials.iter().filter_map(|r| r.metrics.as_ref()).collect();
    if ok.is_empty() {
        return BenchRow {
            image: image.to_string(),
            attack,
            seed: None,
            trial: Trial::Mean,
            metrics: None,
            error: Some("no successful trials".into()),
        };
    }
    let n = ok.len() as f64;
    let avg = |f: fn(&MetricReport) -> f64| ok.iter().map(|m| f(m)).sum::<f64>() / n;
    let nc = avg(|m| m.nc);
    BenchRow {
        image: image.to_string(),
        attack,
        seed: None,
        trial: Trial::Mean,
        metrics: Some(MetricReport {
            nc,
            ber: (1.0 - nc) * 100.0,
            psnr: avg(|m| m.psnr),
            mssim: avg(|m| m.mssim),
        }),
        error: None,
    }
}

/// Runs every (image, attack, trial) cell. Rows come back ordered by image,
/// then attack, then trial, each group followed by its mean row.
pub fn run_bench(images: &[PathBuf], opts: &BenchOptions) -> BenchReport {
    let payload = opts
        .payload
        .clone()
        .unwrap_or_else(|| default_payload(opts.seed, opts.watermark.embed.payload_len));
    let prepared: Vec<Prepared> = images
        .par_iter()
        .map(|p| prepare(p, &payload, &opts.watermark))
        .collect();

    let cells: Vec<(usize, usize, usize)> = (0..images.len())
        .flat_map(|i| {
            opts.attacks.iter().enumerate().flat_map(move |(a, attack)| {
                let trials = if attack.is_stochastic() { opts.trials } else { 1 };
                (0..trials).map(move |t| (i, a, t))
            })
        })
        .collect();
    let rows: Vec<BenchRow> = cells
        .par_iter()
        .map(|&(i, a, t)| {
            let attack = opts.attacks[a];
            let seed = trial_seed(opts.seed, i, a, t);
            let outcome = run_cell(&prepared[i], &attack, seed, &payload, &opts.watermark);
            BenchRow {
                image: prepared[i].name.clone(),
                attack,
                seed: Some(seed),
                trial: Trial::Index(t),
                metrics: outcome.as_ref().ok().copied(),
                error: outcome.err(),
            }
        })
        .collect();

    let mut out = Vec::with_capacity(rows.len() + images.len() * opts.attacks.len());
    let mut start = 0;
    while start < rows.len() {
        let (i, a, _) = cells[start];
        let end = (start..rows.len())
            .find(|&k| (cells[k].0, cells[k].1) != (i, a))
            .unwrap_or(rows.len());
        out.extend_from_slice(&rows[start..end]);
        out.push(mean_row(&prepared[i].name, opts.attacks[a], &rows[start..end]));
        start = end;
    }
    BenchReport { rows: out }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_per_cell_and_repeat() {
        let a = trial_seed(1, 0, 0, 0);
        assert_eq!(a, trial_seed(1, 0, 0, 0));
        assert_ne!(a, trial_seed(2, 0, 0, 0));
        assert_ne!(a, trial_seed(1, 1, 0, 0));
        assert_ne!(a, trial_seed(1, 0, 1, 0));
        assert_ne!(a, trial_seed(1, 0, 0, 1));
        // swapping coordinates gives a different cell
        assert_ne!(trial_seed(1, 1, 2, 3), trial_seed(1, 2, 1, 3));
    }

    #[test]
    fn default_suite_is_valid() {
        let attacks = default_attacks();
        assert_eq!(attacks.len(), 36);
        assert!(attacks.iter().all(|a| a.validate().is_ok()));
        assert_eq!(attacks.iter().filter(|a| a.is_stochastic()).count(), 9);
    }

    #[test]
    fn metric_formatting() {
        assert_eq!(fmt_metric(f64::INFINITY), "inf");
        assert_eq!(fmt_metric(0.98765), "0.9877");
        assert_eq!(fmt_metric(0.0), "0.0000");
    }

    #[test]
    fn mean_row_averages_successful_trials() {
        let m = |nc| MetricReport {
            nc,
            ber: (1.0 - nc) * 100.0,
            psnr: 40.0,
            mssim: 0.9,
        };
        let row = |metrics: Option<MetricReport>| BenchRow {
            image: "x".into(),
            attack: Attack::Awgn { sigma: 5.0 },
            seed: Some(1),
            trial: Trial::Index(0),
            error: metrics.is_none().then(|| "boom".to_string()),
            metrics,
        };
        let mean = mean_row("x", Attack::Awgn { sigma: 5.0 }, &[row(Some(m(1.0))), row(Some(m(0.5))), row(None)]);
        let got = mean.metrics.unwrap();
        assert_eq!(got.nc, 0.75);
        assert_eq!(got.ber, 25.0);
        assert!(mean.error.is_none());
        let failed = mean_row("x", Attack::None, &[row(None)]);
        assert!(failed.metrics.is_none() && failed.error.is_some());
    }
}
