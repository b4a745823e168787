//! Blind grayscale image watermarking in the wavelet/DCT domain with
//! fuzzy-inferred, content-adaptive embedding strength.
//!
//! A 128-bit payload is written 14 times into the coefficient ordering of 8×8
//! DCT blocks taken from seven second-level Haar sub-bands. Block strength
//! comes from a Mamdani fuzzy system over saliency, edge concentration and
//! intensity. Extraction needs only the marked image.

pub mod attacks;
pub mod error;
pub mod features;
pub mod filter;
pub mod fuzzy;
pub mod image;
pub mod metrics;
pub mod pipeline;
pub mod transforms;
pub mod watermark;

pub use attacks::{Attack, CropRegion};
pub use error::{Error, Result};
pub use image::{load_image, save_image, BlockGrid, GrayImage, StrengthMap, WatermarkBits};
pub use metrics::{ber, mssim, nc, psnr, MetricReport};
pub use pipeline::{analyze, embed, extract, Analysis, WatermarkConfig};
pub use watermark::{EmbedConfig, RawExtraction};
