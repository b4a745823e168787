//! Redundant embedding of the payload into DCT coefficient pairs of the seven
//! selected wavelet sub-bands, and blind extraction with majority voting.
//!
//! Every selected band is cut into 8×8 blocks; each block carries one bit as
//! the ordering of two DCT coefficients `a = D(coeff_a)` and `b = D(coeff_b)`:
//! `b >= a` reads as 1, `b < a` as 0. Each band holds two full copies of the
//! payload, so a 512×512 image carries 14 copies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{GrayImage, StrengthMap, WatermarkBits};
use crate::transforms::{
    dct8_forward, dct8_inverse, decompose_to_subbands, read_block, resynthesize, write_block,
    Band, BandGroup, DctBlock,
};

/// Copies of the payload stored in each band.
pub const COPIES_PER_BAND: usize = 2;
/// Total copies across the seven bands.
pub const COPIES: usize = COPIES_PER_BAND * 7;

/// Multipliers applied to the strength map per first-level band group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandCoeffs {
    pub hl: f64,
    pub lh: f64,
    pub hh: f64,
}

impl Default for BandCoeffs {
    fn default() -> Self {
        Self {
            hl: 0.45,
            lh: 0.45,
            hh: 0.1,
        }
    }
}

impl BandCoeffs {
    pub fn get(&self, group: BandGroup) -> f64 {
        match group {
            BandGroup::Hl => self.hl,
            BandGroup::Lh => self.lh,
            BandGroup::Hh => self.hh,
        }
    }
}

/// How payload copies are laid out over the blocks of a band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopyLayout {
    /// Copy `k` of bit `i` sits in block `k * M + i` of every band.
    RowMajorHalves,
    /// As `RowMajorHalves`, then each band's block grid is rotated
    /// toroidally by a band-specific offset so the 14 copies of a bit land in
    /// different parts of the image.
    Shifted,
}

// (row, col) offsets in sixteenths of the band grid, one per band. With these
// a centered or border crop of up to 20% of the image area touches at most 4
// of the 14 copies of any bit.
const BAND_SHIFTS: [(usize, usize); 7] = [
    (0, 0),
    (10, 14),
    (8, 4),
    (2, 2),
    (12, 11),
    (4, 7),
    (6, 9),
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedConfig {
    /// `(row, col)` of the coefficient read as `D(u, v)`.
    pub coeff_a: (usize, usize),
    /// `(row, col)` of the coefficient read as `D(x, y)`.
    pub coeff_b: (usize, usize),
    pub band_coeffs: BandCoeffs,
    /// Lower bound on the coefficient magnitude used to size the gap.
    pub margin_floor: f64,
    pub payload_len: usize,
    /// A voted bit is 1 iff more than this many copies read 1.
    pub vote_threshold: usize,
    pub layout: CopyLayout,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            coeff_a: (5, 6),
            coeff_b: (6, 5),
            band_coeffs: BandCoeffs::default(),
            margin_floor: 170.0,
            payload_len: WatermarkBits::CANONICAL_LEN,
            vote_threshold: 6,
            layout: CopyLayout::Shifted,
        }
    }
}

impl EmbedConfig {
    pub fn validate(&self) -> Result<()> {
        let inside = |(r, c): (usize, usize)| r < 8 && c < 8;
        if !inside(self.coeff_a) || !inside(self.coeff_b) {
            return Err(Error::Config("DCT coordinates must lie inside the 8x8 block".into()));
        }
        if self.coeff_a == self.coeff_b {
            return Err(Error::Config("coeff_a and coeff_b must differ".into()));
        }
        let bc = self.band_coeffs;
        if !(bc.hl > 0.0 && bc.lh > 0.0 && bc.hh > 0.0) {
            return Err(Error::Config("band coefficients must be positive".into()));
        }
        if !(self.margin_floor >= 0.0 && self.margin_floor.is_finite()) {
            return Err(Error::Config("margin_floor must be finite and >= 0".into()));
        }
        if self.payload_len == 0 {
            return Err(Error::Config("payload_len must be positive".into()));
        }
        if self.vote_threshold >= COPIES {
            return Err(Error::Config(format!(
                "vote_threshold must be below the {COPIES} copies"
            )));
        }
        Ok(())
    }

    /// Block coordinates inside a `rows`×`cols` band grid for copy `copy` of bit `bit`.
    fn block_position(&self, band: Band, copy: usize, bit: usize, rows: usize, cols: usize) -> (usize, usize) {
        let p = copy * self.payload_len + bit;
        let (r, c) = (p / cols, p % cols);
        match self.layout {
            CopyLayout::RowMajorHalves => (r, c),
            CopyLayout::Shifted => {
                let (sr, sc) = BAND_SHIFTS[band.index()];
                ((r + sr * rows / 16) % rows, (c + sc * cols / 16) % cols)
            }
        }
    }
}

/// Effective strength of block `(row, col)` of a band.
///
/// A band block covers a square patch of the strength map (4×4 cells for a
/// 512×512 image); the result is the patch mean times the band multiplier.
pub fn block_strength(
    band: Band,
    block: (usize, usize),
    smap: &StrengthMap,
    band_grid: (usize, usize),
    cfg: &EmbedConfig,
) -> Result<f64> {
    let (grid_rows, grid_cols) = band_grid;
    if block.0 >= grid_rows || block.1 >= grid_cols {
        return Err(Error::InvalidParameter(format!(
            "block {block:?} outside the {grid_rows}x{grid_cols} band grid"
        )));
    }
    if smap.rows() % grid_rows != 0 || smap.cols() % grid_cols != 0 {
        return Err(Error::ShapeMismatch(format!(
            "strength map {}x{} does not tile a {grid_rows}x{grid_cols} band grid",
            smap.rows(),
            smap.cols()
        )));
    }
    let (ph, pw) = (smap.rows() / grid_rows, smap.cols() / grid_cols);
    let mut sum = 0.0;
    for r in block.0 * ph..(block.0 + 1) * ph {
        for c in block.1 * pw..(block.1 + 1) * pw {
            sum += smap.get(r, c);
        }
    }
    Ok(cfg.band_coeffs.get(band.group()) * sum / (ph * pw) as f64)
}

/// Signed gap required for a block with coefficients `a`, `b`.
pub fn required_gap(a: f64, b: f64, alpha: f64, cfg: &EmbedConfig) -> f64 {
    alpha * a.abs().max(b.abs()).max(cfg.margin_floor)
}

/// Forces the coefficient ordering of `blk` to encode `bit` with a margin.
///
/// Blocks that already encode the bit with at least the required gap are
/// returned unchanged; otherwise the pair is set symmetrically about its mean.
pub fn embed_bit(blk: &DctBlock, bit: u8, alpha: f64, cfg: &EmbedConfig) -> DctBlock {
    let (a, b) = (blk.get(cfg.coeff_a.0, cfg.coeff_a.1), blk.get(cfg.coeff_b.0, cfg.coeff_b.1));
    let delta = required_gap(a, b, alpha, cfg);
    let gap = if bit == 1 { b - a } else { a - b };
    if gap >= delta {
        return *blk;
    }
    let mid = 0.5 * (a + b);
    let (new_a, new_b) = if bit == 1 {
        (mid - 0.5 * delta, mid + 0.5 * delta)
    } else {
        (mid + 0.5 * delta, mid - 0.5 * delta)
    };
    let mut out = *blk;
    out.set(cfg.coeff_a.0, cfg.coeff_a.1, new_a);
    out.set(cfg.coeff_b.0, cfg.coeff_b.1, new_b);
    out
}

/// Reads one bit: 1 when `D(coeff_b) >= D(coeff_a)`.
pub fn read_bit(blk: &DctBlock, cfg: &EmbedConfig) -> u8 {
    u8::from(blk.get(cfg.coeff_b.0, cfg.coeff_b.1) >= blk.get(cfg.coeff_a.0, cfg.coeff_a.1))
}

fn band_grid(img: &GrayImage, cfg: &EmbedConfig) -> Result<(usize, usize)> {
    let grid = (img.height() / 32, img.width() / 32);
    if img.height() % 32 != 0 || img.width() % 32 != 0 {
        return Err(Error::InvalidDimensions {
            width: img.width(),
            height: img.height(),
            reason: "embedding needs multiples of 32",
        });
    }
    if grid.0 * grid.1 < COPIES_PER_BAND * cfg.payload_len {
        return Err(Error::InvalidDimensions {
            width: img.width(),
            height: img.height(),
            reason: "too small to hold two payload copies per band",
        });
    }
    Ok(grid)
}

/// Embeds `bits` into `img`. The result is real-valued; quantize on save.
pub fn embed(
    img: &GrayImage,
    bits: &WatermarkBits,
    smap: &StrengthMap,
    cfg: &EmbedConfig,
) -> Result<GrayImage> {
    cfg.validate()?;
    if bits.len() != cfg.payload_len {
        return Err(Error::PayloadLength {
            expected: cfg.payload_len,
            found: bits.len(),
        });
    }
    if (smap.rows(), smap.cols()) != img.block_dims() {
        return Err(Error::ShapeMismatch(format!(
            "strength map {}x{} for an image with {:?} blocks",
            smap.rows(),
            smap.cols(),
            img.block_dims()
        )));
    }
    let grid = band_grid(img, cfg)?;
    let (mut bands, ctx) = decompose_to_subbands(img)?;
    for band in Band::ALL {
        let plane = bands.band_mut(band);
        for copy in 0..COPIES_PER_BAND {
            for (i, &bit) in bits.bits().iter().enumerate() {
                let (br, bc) = cfg.block_position(band, copy, i, grid.0, grid.1);
                let alpha = block_strength(band, (br, bc), smap, grid, cfg)?;
                let coeffs = dct8_forward(&read_block(plane, br, bc));
                let marked = embed_bit(&coeffs, bit, alpha, cfg);
                if marked != coeffs {
                    write_block(plane, br, bc, &dct8_inverse(&marked));
                }
            }
        }
    }
    resynthesize(&bands, &ctx)
}

/// The bits read from every copy, indexed `[copy][bit]`.
///
/// Copies are ordered by band (LLHL, HLHL, LHHL, LLLH, HLLH, LHLH, LLHH),
/// two per band.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawExtraction {
    copies: Vec<Vec<u8>>,
}

impl RawExtraction {
    pub fn new(copies: Vec<Vec<u8>>) -> Result<Self> {
        let len = copies.first().map_or(0, Vec::len);
        if copies.is_empty() || len == 0 || copies.iter().any(|c| c.len() != len) {
            return Err(Error::ShapeMismatch("copies must be non-empty and equally long".into()));
        }
        Ok(Self { copies })
    }

    pub fn copies(&self) -> &[Vec<u8>] {
        &self.copies
    }

    pub fn copy(&self, j: usize) -> &[u8] {
        &self.copies[j]
    }

    pub fn payload_len(&self) -> usize {
        self.copies[0].len()
    }

    /// Number of copies reading 1 at each bit position.
    pub fn vote_counts(&self) -> Vec<usize> {
        (0..self.payload_len())
            .map(|i| self.copies.iter().map(|c| c[i] as usize).sum())
            .collect()
    }
}

/// Blind extraction: no cover image or strength map is needed.
pub fn extract(img: &GrayImage, cfg: &EmbedConfig) -> Result<RawExtraction> {
    cfg.validate()?;
    let grid = band_grid(img, cfg)?;
    let (bands, _) = decompose_to_subbands(img)?;
    let mut copies = Vec::with_capacity(COPIES);
    for band in Band::ALL {
        let plane = bands.band(band);
        for copy in 0..COPIES_PER_BAND {
            copies.push(
                (0..cfg.payload_len)
                    .map(|i| {
                        let (br, bc) = cfg.block_position(band, copy, i, grid.0, grid.1);
                        read_bit(&dct8_forward(&read_block(plane, br, bc)), cfg)
                    })
                    .collect(),
            );
        }
    }
    RawExtraction::new(copies)
}

/// Majority vote: bit `i` is 1 iff more than `threshold` copies read 1.
pub fn vote(raw: &RawExtraction, threshold: usize) -> WatermarkBits {
    let bits = raw
        .vote_counts()
        .into_iter()
        .map(|v| u8::from(v > threshold))
        .collect();
    WatermarkBits::new(bits).expect("votes are binary and non-empty")
}
