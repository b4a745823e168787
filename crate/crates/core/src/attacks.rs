//! Signal-processing attacks used to evaluate robustness.
//!
//! Every attack takes the 8-bit version of its input (what would be written
//! to disk) and returns an image whose samples are integers in `[0, 255]`.

use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{gaussian_kernel, separable_replicate};
use crate::image::{quantize_sample, GrayImage, Plane};
use crate::transforms::{dct8_forward, dct8_inverse, read_block, write_block, DctBlock};

/// Luminance quantization table (row-major, natural order).
pub const JPEG_LUMA_TABLE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CropRegion {
    /// A centered square (rectangle for non-square images) is removed.
    Center,
    /// A border ring of equal width on all four sides is removed.
    Around,
}

fn default_fill() -> u8 {
    0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Attack {
    /// Leaves the image untouched apart from 8-bit quantization.
    None,
    Jpeg {
        quality: u8,
    },
    GaussianFilter {
        size: usize,
        sigma: f64,
    },
    MedianFilter {
        size: usize,
    },
    /// Additive white Gaussian noise with standard deviation `sigma` grey levels.
    Awgn {
        sigma: f64,
    },
    SaltPepper {
        density: f64,
    },
    Crop {
        region: CropRegion,
        fraction: f64,
        #[serde(default = "default_fill")]
        fill: u8,
    },
}

impl Attack {
    pub fn name(&self) -> &'static str {
        match self {
            Attack::None => "none",
            Attack::Jpeg { .. } => "jpeg",
            Attack::GaussianFilter { .. } => "gaussian_filter",
            Attack::MedianFilter { .. } => "median_filter",
            Attack::Awgn { .. } => "awgn",
            Attack::SaltPepper { .. } => "salt_pepper",
            Attack::Crop {
                region: CropRegion::Center,
                ..
            } => "crop_center",
            Attack::Crop {
                region: CropRegion::Around,
                ..
            } => "crop_around",
        }
    }

    /// Parameters as `key=value` pairs joined by `;`.
    pub fn params(&self) -> String {
        match *self {
            Attack::None => String::new(),
            Attack::Jpeg { quality } => format!("quality={quality}"),
            Attack::GaussianFilter { size, sigma } => format!("size={size};sigma={sigma}"),
            Attack::MedianFilter { size } => format!("size={size}"),
            Attack::Awgn { sigma } => format!("sigma={sigma}"),
            Attack::SaltPepper { density } => format!("density={density}"),
            Attack::Crop { fraction, fill, .. } => format!("fraction={fraction};fill={fill}"),
        }
    }

    /// Whether the outcome depends on the seed.
    pub fn is_stochastic(&self) -> bool {
        matches!(self, Attack::Awgn { .. } | Attack::SaltPepper { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            Attack::None => Ok(()),
            Attack::Jpeg { quality } if !(1..=100).contains(&quality) => {
                bad(format!("JPEG quality {quality} outside 1..=100"))
            }
            Attack::GaussianFilter { size, sigma } if size % 2 == 0 || size < 3 || !(sigma > 0.0) => {
                bad(format!("Gaussian filter needs odd size >= 3 and sigma > 0 (got {size}, {sigma})"))
            }
            Attack::MedianFilter { size } if size % 2 == 0 || size < 3 => {
                bad(format!("median filter needs odd size >= 3 (got {size})"))
            }
            Attack::Awgn { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                bad(format!("noise sigma must be finite and >= 0 (got {sigma})"))
            }
            Attack::SaltPepper { density } if !(0.0..=1.0).contains(&density) => {
                bad(format!("salt-and-pepper density {density} outside [0, 1]"))
            }
            Attack::Crop { fraction, .. } if !(fraction > 0.0 && fraction < 1.0) => {
                bad(format!("crop fraction {fraction} outside (0, 1)"))
            }
            _ => Ok(()),
        }
    }

    /// Applies the attack. `seed` only matters for stochastic attacks.
    pub fn apply(&self, img: &GrayImage, seed: u64) -> Result<GrayImage> {
        self.validate()?;
        let img = img.quantized();
        match *self {
            Attack::None => Ok(img),
            Attack::Jpeg { quality } => jpeg(&img, quality),
            Attack::GaussianFilter { size, sigma } => gaussian_filter(&img, size, sigma),
            Attack::MedianFilter { size } => median_filter(&img, size),
            Attack::Awgn { sigma } => awgn(&img, sigma, seed),
            Attack::SaltPepper { density } => salt_pepper(&img, density, seed),
            Attack::Crop {
                region,
                fraction,
                fill,
            } => crop(&img, region, fraction, fill),
        }
    }
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params();
        if params.is_empty() {
            f.write_str(self.name())
        } else {
            write!(f, "{}({})", self.name(), params)
        }
    }
}

fn finish(plane: Plane) -> Result<GrayImage> {
    GrayImage::from_plane(plane.map(|v| quantize_sample(v) as f64))
}

/// Quantization table for a quality factor in `1..=100`.
pub fn jpeg_table(quality: u8) -> [f64; 64] {
    let q = quality.clamp(1, 100) as u32;
    let scale = if q < 50 { 5000 / q } else { 200 - 2 * q };
    let mut out = [0.0; 64];
    for (o, &base) in out.iter_mut().zip(JPEG_LUMA_TABLE.iter()) {
        *o = ((base as u32 * scale + 50) / 100).clamp(1, 255) as f64;
    }
    out
}

/// Baseline JPEG round trip restricted to its lossy part: level shift,
/// blockwise DCT, quantization and reconstruction.
pub fn jpeg(img: &GrayImage, quality: u8) -> Result<GrayImage> {
    let table = jpeg_table(quality);
    let mut plane = img.plane().map(|v| v - 128.0);
    for br in 0..img.height() / 8 {
        for bc in 0..img.width() / 8 {
            let coeffs = dct8_forward(&read_block(&plane, br, bc));
            let mut q = DctBlock([0.0; 64]);
            for k in 0..64 {
                q.0[k] = (coeffs.0[k] / table[k]).round() * table[k];
            }
            write_block(&mut plane, br, bc, &dct8_inverse(&q));
        }
    }
    finish(plane.map(|v| v + 128.0))
}

pub fn gaussian_filter(img: &GrayImage, size: usize, sigma: f64) -> Result<GrayImage> {
    let kernel = gaussian_kernel(sigma, size / 2);
    finish(separable_replicate(img.plane(), &kernel))
}

/// Median over a `size`×`size` window with replicated borders.
pub fn median_filter(img: &GrayImage, size: usize) -> Result<GrayImage> {
    let src = img.plane();
    let r = (size / 2) as isize;
    let mut window = Vec::with_capacity(size * size);
    let out = Plane::from_fn(img.width(), img.height(), |row, col| {
        window.clear();
        for dr in -r..=r {
            for dc in -r..=r {
                window.push(src.get_clamped(row as isize + dr, col as isize + dc));
            }
        }
        let mid = window.len() / 2;
        *window.select_nth_unstable_by(mid, f64::total_cmp).1
    });
    finish(out)
}

pub fn awgn(img: &GrayImage, sigma: f64, seed: u64) -> Result<GrayImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut plane = img.plane().clone();
    plane.data_mut().iter_mut().for_each(|v| *v += noise.sample(&mut rng));
    finish(plane)
}

/// Sets exactly `round(density * N)` distinct pixels, half to 0 and half to
/// 255; an odd leftover pixel gets a random one of the two.
pub fn salt_pepper(img: &GrayImage, density: f64, seed: u64) -> Result<GrayImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = img.len();
    let count = ((density * n as f64).round() as usize).min(n);
    let mut plane = img.plane().clone();
    let picked = index::sample(&mut rng, n, count).into_vec();
    let half = count / 2;
    for (k, &p) in picked.iter().enumerate() {
        let value = if k < half {
            0.0
        } else if k < 2 * half {
            255.0
        } else if rng.gen_bool(0.5) {
            255.0
        } else {
            0.0
        };
        plane.data_mut()[p] = value;
    }
    GrayImage::from_plane(plane)
}

/// Rectangle `(row, col, height, width)` removed by a crop.
pub fn crop_rects(width: usize, height: usize, region: CropRegion, fraction: f64) -> Vec<(usize, usize, usize, usize)> {
    let n = (width * height) as f64;
    match region {
        CropRegion::Center => {
            let s = fraction.sqrt();
            let h = ((height as f64 * s).round() as usize).min(height);
            let w = ((width as f64 * s).round() as usize).min(width);
            vec![((height - h) / 2, (width - w) / 2, h, w)]
        }
        CropRegion::Around => {
            let limit = width.min(height).div_ceil(2);
            let border = (0..=limit)
                .find(|&b| {
                    let inner = width.saturating_sub(2 * b) * height.saturating_sub(2 * b);
                    (width * height - inner) as f64 >= fraction * n
                })
                .unwrap_or(limit);
            if border == 0 {
                return Vec::new();
            }
            let b = border.min(height).min(width);
            vec![
                (0, 0, b, width),
                (height - b, 0, b, width),
                (0, 0, height, b),
                (0, width - b, height, b),
            ]
        }
    }
}

pub fn crop(img: &GrayImage, region: CropRegion, fraction: f64, fill: u8) -> Result<GrayImage> {
    let mut plane = img.plane().clone();
    for (r0, c0, h, w) in crop_rects(img.width(), img.height(), region, fraction) {
        for r in r0..r0 + h {
            for c in c0..c0 + w {
                plane.set(r, c, fill as f64);
            }
        }
    }
    GrayImage::from_plane(plane)
}
