use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fuzzmark_core::features::FeatureMap;
use fuzzmark_core::transforms::Band;
use fuzzmark_core::watermark::COPIES_PER_BAND;
use fuzzmark_core::{analyze, ber, extract, load_image, mssim, psnr, save_image, WatermarkBits};

use crate::bench::{default_payload, run_bench, BenchOptions};
use crate::config::RunConfig;
use crate::error::{CliError, Result, StageExt};

#[derive(Parser, Debug)]
#[command(name = "fuzzmark", version, about = "Blind DWT-DCT image watermarking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// JSON run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed (overrides the configuration)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Embed a payload into a cover image
    Embed {
        /// Cover image (binary PGM)
        cover: Option<PathBuf>,
        /// Payload file holding one line of 0/1 characters; random when omitted
        #[arg(long)]
        payload: Option<PathBuf>,
        /// Watermarked image to write
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Recover the payload from a watermarked image
    Extract {
        image: PathBuf,
        /// Where to write the recovered payload
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the robustness benchmark and write a CSV report
    Bench {
        images: Vec<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        payload: Option<PathBuf>,
        /// CSV destination; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Dump the saliency, edge, intensity and strength maps of an image
    Features {
        image: PathBuf,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Sidecar path for the strength map of a watermarked image.
pub fn strength_sidecar(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.strength.pgm"))
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let report = |e: std::io::Error| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    match cli.command {
        Command::Embed {
            cover,
            payload,
            out,
            common,
        } => {
            let mut cfg = load_config(&common)?;
            cfg.cover = cover.or(cfg.cover);
            cfg.payload = payload.or(cfg.payload);
            cfg.output = out.or(cfg.output);
            cfg.validate()?;
            let cover_path = cfg.cover.clone().ok_or_else(|| CliError::Usage("no cover image given".into()))?;
            let out_path = cfg.output.clone().ok_or_else(|| CliError::Usage("no output path given (--out)".into()))?;
            let wm = cfg.watermark_config()?;
            let bits = match &cfg.payload {
                Some(p) => WatermarkBits::load(p).stage("payload")?,
                None => default_payload(cfg.seed, wm.embed.payload_len),
            };
            if bits.len() != wm.embed.payload_len {
                return Err(CliError::Core {
                    stage: "payload",
                    source: fuzzmark_core::Error::PayloadLength {
                        expected: wm.embed.payload_len,
                        found: bits.len(),
                    },
                });
            }
            let cover = load_image(&cover_path).stage("load cover")?;
            let (marked, analysis) = fuzzmark_core::embed(&cover, &bits, &wm).stage("embed")?;
            let marked = marked.quantized();
            save_image(&marked, &out_path).stage("write watermarked image")?;
            let sidecar = strength_sidecar(&out_path);
            save_image(&analysis.strength.to_image(255.0), &sidecar).stage("write strength map")?;
            writeln!(stdout, "psnr: {:.4} dB", psnr(&cover, &marked).stage("metrics")?).map_err(report)?;
            writeln!(stdout, "mssim: {:.4}", mssim(&cover, &marked).stage("metrics")?).map_err(report)?;
            writeln!(stdout, "payload: {bits}").map_err(report)?;
            writeln!(stdout, "strength map: {}", sidecar.display()).map_err(report)?;
        }
        Command::Extract { image, out, common } => {
            let cfg = load_config(&common)?;
            cfg.validate()?;
            let img = load_image(&image).stage("load image")?;
            let (bits, raw) = extract(&img, &cfg.embed).stage("extract")?;
            writeln!(stdout, "payload: {bits}").map_err(report)?;
            writeln!(stdout, "copy band ber_vs_voted").map_err(report)?;
            for (j, copy) in raw.copies().iter().enumerate() {
                let band = Band::ALL[j / COPIES_PER_BAND];
                let copy = WatermarkBits::new(copy.clone()).stage("extract")?;
                let b = ber(&bits, &copy).stage("metrics")?;
                writeln!(stdout, "{j:>4} {:<4} {b:.4}", band.name()).map_err(report)?;
            }
            if let Some(path) = out {
                bits.save(&path).stage("write payload")?;
            }
        }
        Command::Bench {
            images,
            trials,
            payload,
            out,
            common,
        } => {
            let mut cfg = load_config(&common)?;
            if !images.is_empty() {
                cfg.images = images;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            cfg.payload = payload.or(cfg.payload);
            cfg.report = out.or(cfg.report);
            cfg.validate()?;
            if cfg.images.is_empty() {
                return Err(CliError::Usage("no benchmark images given".into()));
            }
            let watermark = cfg.watermark_config()?;
            let payload = cfg
                .payload
                .as_ref()
                .map(|p| WatermarkBits::load(p).stage("payload"))
                .transpose()?;
            let opts = BenchOptions {
                watermark,
                attacks: cfg.attacks(),
                trials: cfg.trials,
                seed: cfg.seed,
                payload,
            };
            let result = run_bench(&cfg.images, &opts);
            match &cfg.report {
                Some(path) => {
                    let mut w = create(path)?;
                    result.write_csv(&mut w)?;
                    w.flush().map_err(io_err(path))?;
                }
                None => result.write_csv(&mut *stdout)?,
            }
        }
        Command::Features { image, out, common } => {
            let cfg = load_config(&common)?;
            cfg.validate()?;
            let wm = cfg.watermark_config()?;
            let img = load_image(&image).stage("load image")?;
            let analysis = analyze(&img, &wm).stage("features")?;
            std::fs::create_dir_all(&out).map_err(io_err(&out))?;
            let f = &analysis.features;
            let dump = |name: &str, map: &FeatureMap| -> Result<()> {
                save_image(&map.grid.to_image(255.0), out.join(format!("{name}.pgm"))).stage("write feature map")
            };
            dump("saliency", &f.saliency)?;
            dump("edge", &f.edge)?;
            dump("intensity", &f.intensity)?;
            save_image(&analysis.strength.to_image(255.0), out.join("strength.pgm")).stage("write strength map")?;
            let edge_terms = serde_json::to_string(&analysis.fis.edge)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            writeln!(stdout, "edge terms: {edge_terms}").map_err(report)?;
            writeln!(
                stdout,
                "strength range: [{:.4}, {:.4}]",
                analysis.strength.min(),
                analysis.strength.max()
            )
            .map_err(report)?;
        }
    }
    Ok(())
}
