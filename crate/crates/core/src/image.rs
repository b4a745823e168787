//! Grayscale images, block grids, watermark payloads and their file formats.
//!
//! Samples are kept as `f64` in memory. Quantization to 8 bits happens only
//! when an image is written to disk (or explicitly via [`GrayImage::quantized`]),
//! using clamp to `[0, 255]` followed by round-half-away-from-zero.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Side length of the square blocks used throughout the pipeline.
pub const BLOCK: usize = 8;

/// A dense row-major 2-D array of reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} samples for a {width}x{height} plane",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    /// Sample with coordinates clamped to the plane (replicate padding).
    #[inline]
    pub fn get_clamped(&self, row: isize, col: isize) -> f64 {
        let r = row.clamp(0, self.height as isize - 1) as usize;
        let c = col.clamp(0, self.width as isize - 1) as usize;
        self.get(r, c)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn same_shape(&self, other: &Plane) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Copy of the `w`x`h` window whose top-left corner is `(row, col)`.
    pub fn window(&self, row: usize, col: usize, w: usize, h: usize) -> Plane {
        Plane::from_fn(w, h, |r, c| self.get(row + r, col + c))
    }

    pub fn paste(&mut self, row: usize, col: usize, src: &Plane) {
        for r in 0..src.height {
            let dst = (row + r) * self.width + col;
            self.data[dst..dst + src.width]
                .copy_from_slice(&src.data[r * src.width..(r + 1) * src.width]);
        }
    }

    pub fn max_abs_diff(&self, other: &Plane) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Converts a real sample to a byte: clamp to `[0, 255]`, round half away from zero.
#[inline]
pub fn quantize_sample(v: f64) -> u8 {
    // f64::round is half-away-from-zero
    v.clamp(0.0, 255.0).round() as u8
}

/// An 8-bit luminance image held with real-valued samples.
///
/// Width and height are positive multiples of [`BLOCK`] and every sample is
/// finite.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    plane: Plane,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(Self {
            plane: Plane::from_vec(width, height, samples)?,
        })
    }

    pub fn from_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(width, height, bytes.iter().map(|&b| f64::from(b)).collect())
    }

    pub fn from_plane(plane: Plane) -> Result<Self> {
        let (w, h) = (plane.width(), plane.height());
        Self::new(w, h, plane.into_vec())
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        Self::from_plane(Plane::from_fn(width, height, f))
    }

    pub fn width(&self) -> usize {
        self.plane.width()
    }

    pub fn height(&self) -> usize {
        self.plane.height()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.plane.get(row, col)
    }

    pub fn samples(&self) -> &[f64] {
        self.plane.data()
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn into_plane(self) -> Plane {
        self.plane
    }

    pub fn len(&self) -> usize {
        self.plane.data().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.samples().iter().map(|&v| quantize_sample(v)).collect()
    }

    /// The image as it would read back after an 8-bit save/load.
    pub fn quantized(&self) -> GrayImage {
        GrayImage {
            plane: self.plane.map(|v| f64::from(quantize_sample(v))),
        }
    }

    /// Number of 8×8 blocks per row and per column.
    pub fn block_dims(&self) -> (usize, usize) {
        (self.height() / BLOCK, self.width() / BLOCK)
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "empty image",
        });
    }
    if width % BLOCK != 0 || height % BLOCK != 0 {
        return Err(Error::DimensionsNotMultipleOf8 { width, height });
    }
    Ok(())
}

/// Reads a binary PGM (P5) file with maxval 255.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode_pgm(&fs::read(path)?)
}

/// Writes `img` as binary PGM (P5), quantizing each sample to a byte.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&encode_pgm(img))?;
    Ok(())
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.to_bytes());
    out
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut cur = HeaderCursor { bytes, pos: 0 };
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::MalformedPgm("missing P5 magic number".into()));
    }
    cur.pos = 2;
    let width = cur.next_number("width")?;
    let height = cur.next_number("height")?;
    let maxval = cur.next_number("maxval")?;
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::MalformedPgm("missing whitespace after maxval".into())),
    }
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    let (width, height) = (width as usize, height as usize);
    if width == 0 || height == 0 {
        return Err(Error::MalformedPgm("zero dimension".into()));
    }
    check_dims(width, height)?;
    let expected = width * height;
    let raster = &bytes[cur.pos..];
    if raster.len() < expected {
        return Err(Error::TruncatedData {
            expected,
            found: raster.len(),
        });
    }
    GrayImage::from_bytes(width, height, &raster[..expected])
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn next_number(&mut self, what: &str) -> Result<u32> {
        let start = self.pos;
        self.skip_whitespace_and_comments();
        if self.pos == start {
            return Err(Error::MalformedPgm(format!("expected whitespace before {what}")));
        }
        let digits_start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if digits_start == self.pos {
            return Err(Error::MalformedPgm(format!("missing {what}")));
        }
        std::str::from_utf8(&self.bytes[digits_start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedPgm(format!("{what} out of range")))
    }
}

/// Splits an image into 8×8 blocks in row-major block order.
pub fn partition_blocks(img: &GrayImage) -> Vec<[f64; 64]> {
    let (rows, cols) = img.block_dims();
    let mut blocks = Vec::with_capacity(rows * cols);
    for br in 0..rows {
        for bc in 0..cols {
            let mut block = [0.0; 64];
            for r in 0..BLOCK {
                for c in 0..BLOCK {
                    block[r * BLOCK + c] = img.get(br * BLOCK + r, bc * BLOCK + c);
                }
            }
            blocks.push(block);
        }
    }
    blocks
}

/// Inverse of [`partition_blocks`].
pub fn assemble_blocks(width: usize, height: usize, blocks: &[[f64; 64]]) -> Result<GrayImage> {
    check_dims(width, height)?;
    let cols = width / BLOCK;
    if blocks.len() != cols * (height / BLOCK) {
        return Err(Error::ShapeMismatch(format!(
            "{} blocks for a {width}x{height} image",
            blocks.len()
        )));
    }
    let mut plane = Plane::zeros(width, height);
    for (i, block) in blocks.iter().enumerate() {
        let (br, bc) = (i / cols, i % cols);
        for r in 0..BLOCK {
            for c in 0..BLOCK {
                plane.set(br * BLOCK + r, bc * BLOCK + c, block[r * BLOCK + c]);
            }
        }
    }
    GrayImage::from_plane(plane)
}

/// One scalar per 8×8 block of an image.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockGrid {
    rows: usize,
    cols: usize,
    cells: Vec<f64>,
}

/// Per-block embedding strength produced by the fuzzy system.
pub type StrengthMap = BlockGrid;

impl BlockGrid {
    pub fn new(rows: usize, cols: usize, cells: Vec<f64>) -> Result<Self> {
        if cells.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} cells for a {rows}x{cols} grid",
                cells.len()
            )));
        }
        Ok(Self { rows, cols, cells })
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            cells: vec![value; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.cells[row * self.cols + col] = value;
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn same_shape(&self, other: &BlockGrid) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub fn min(&self) -> f64 {
        self.cells.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.cells.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Renders the grid as a `cols`×`rows` image with each cell scaled by `scale`.
    ///
    /// Grids whose sides are not multiples of 8 are padded with zeros.
    pub fn to_image(&self, scale: f64) -> GrayImage {
        let w = self.cols.div_ceil(BLOCK).max(1) * BLOCK;
        let h = self.rows.div_ceil(BLOCK).max(1) * BLOCK;
        let plane = Plane::from_fn(w, h, |r, c| {
            if r < self.rows && c < self.cols {
                self.get(r, c) * scale
            } else {
                0.0
            }
        });
        GrayImage::from_plane(plane).expect("padded grid has valid dimensions")
    }
}

/// An ordered binary watermark payload.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WatermarkBits(Vec<u8>);

impl WatermarkBits {
    /// Payload length of the canonical configuration.
    pub const CANONICAL_LEN: usize = 128;

    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidPayload("empty payload".into()));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidPayload(format!("bit value {b} is not 0 or 1")));
        }
        Ok(Self(bits))
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Result<Self> {
        Self::new(bits.into_iter().map(u8::from).collect())
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![1; len])
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| rng.gen_range(0..=1u8)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn complement(&self) -> Self {
        Self(self.0.iter().map(|b| 1 - b).collect())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        fs::read_to_string(path)?.parse()
    }

    /// Writes the payload as one line of `0`/`1` characters.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, format!("{self}\n"))?;
        Ok(())
    }
}

impl FromStr for WatermarkBits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let line = s.strip_suffix('\n').unwrap_or(s);
        let line = line.strip_suffix('\r').unwrap_or(line);
        let bits = line
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidPayload(format!(
                    "unexpected character {other:?} (expected '0' or '1')"
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(bits)
    }
}

impl fmt::Display for WatermarkBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn pgm(width: usize, height: usize, maxval: u32, raster: &[u8]) -> Vec<u8> {
        let mut v = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
        v.extend_from_slice(raster);
        v
    }

    #[test]
    fn zero_image_loads_as_zeros() {
        let img = decode_pgm(&pgm(16, 8, 255, &[0; 128])).unwrap();
        assert_eq!((img.width(), img.height()), (16, 8));
        assert!(img.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn width_not_multiple_of_8_is_rejected() {
        let err = decode_pgm(&pgm(513, 8, 255, &vec![0; 513 * 8])).unwrap_err();
        assert!(err.to_string().contains("dimensions not multiple of 8"), "{err}");
    }

    #[test]
    fn header_errors() {
        assert!(matches!(
            decode_pgm(b"P2\n8 8\n255\n"),
            Err(Error::MalformedPgm(_))
        ));
        assert!(matches!(
            decode_pgm(&pgm(8, 8, 65535, &[0; 128])),
            Err(Error::UnsupportedMaxval(65535))
        ));
        assert!(matches!(
            decode_pgm(&pgm(8, 8, 255, &[0; 63])),
            Err(Error::TruncatedData {
                expected: 64,
                found: 63
            })
        ));
        assert!(matches!(decode_pgm(b"P5\n8\n"), Err(Error::MalformedPgm(_))));
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P5\n# a comment\n8 # another\n8\n255\n".to_vec();
        bytes.extend_from_slice(&[7; 64]);
        let img = decode_pgm(&bytes).unwrap();
        assert!(img.samples().iter().all(|&v| v == 7.0));
    }

    #[test]
    fn quantization_clamps_and_rounds_half_away() {
        assert_eq!(quantize_sample(255.7), 255);
        assert_eq!(quantize_sample(-3.0), 0);
        assert_eq!(quantize_sample(127.5), 128);
        assert_eq!(quantize_sample(127.4999), 127);
        assert_eq!(quantize_sample(0.5), 1);
    }

    #[test]
    fn save_applies_rounding_rule() {
        // oracle: floor(x + 0.5) for non-negative x, then clamp
        let oracle = |x: f64| (x + 0.5).floor().clamp(0.0, 255.0) as u8;
        let values = [127.5, 255.7, -3.0, 0.49, 12.5, 254.5, 3.2, 99.99];
        let mut samples = values.to_vec();
        samples.resize(64, 0.0);
        let img = GrayImage::new(8, 8, samples).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.pgm");
        save_image(&img, &path).unwrap();
        let back = load_image(&path).unwrap();
        for (i, v) in values.iter().enumerate() {
            assert_eq!(back.samples()[i], f64::from(oracle(*v)), "value {v}");
        }
    }

    #[test]
    fn non_finite_samples_rejected() {
        let mut s = vec![0.0; 64];
        s[5] = f64::NAN;
        assert!(matches!(GrayImage::new(8, 8, s), Err(Error::NonFiniteSample(5))));
    }

    #[test]
    fn partition_512_gives_4096_blocks() {
        let img = GrayImage::filled(512, 512, 3.0).unwrap();
        assert_eq!(partition_blocks(&img).len(), 4096);
    }

    #[test]
    fn partition_8x8_is_identity() {
        let img = GrayImage::from_fn(8, 8, |r, c| (r * 8 + c) as f64).unwrap();
        let blocks = partition_blocks(&img);
        assert_eq!(blocks.len(), 1);
        assert_eq!(&blocks[0][..], img.samples());
    }

    #[test]
    fn partition_quadrants_in_row_major_order() {
        let quadrant = |r: usize, c: usize| match (r < 8, c < 8) {
            (true, true) => 10.0,
            (true, false) => 20.0,
            (false, true) => 30.0,
            (false, false) => 40.0,
        };
        let img = GrayImage::from_fn(16, 16, quadrant).unwrap();
        let blocks = partition_blocks(&img);
        let firsts: Vec<f64> = blocks.iter().map(|b| b[0]).collect();
        assert_eq!(firsts, vec![10.0, 20.0, 30.0, 40.0]);
        for b in &blocks {
            assert!(b.iter().all(|&v| v == b[0]));
        }
    }

    #[test]
    fn payload_parsing() {
        let w: WatermarkBits = "0110\n".parse().unwrap();
        assert_eq!(w.bits(), &[0, 1, 1, 0]);
        assert_eq!(w.to_string(), "0110");
        assert!("01x1".parse::<WatermarkBits>().is_err());
        assert!("".parse::<WatermarkBits>().is_err());
    }

    #[test]
    fn grid_to_image_pads() {
        let g = BlockGrid::filled(3, 5, 1.0);
        let img = g.to_image(255.0);
        assert_eq!((img.width(), img.height()), (8, 8));
        assert_eq!(img.get(2, 4), 255.0);
        assert_eq!(img.get(3, 4), 0.0);
    }

    proptest! {
        #[test]
        fn save_load_round_trip(bw in 1usize..4, bh in 1usize..4, seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (w, h) = (bw * 8, bh * 8);
            let bytes: Vec<u8> = (0..w * h).map(|_| rng.gen()).collect();
            let img = GrayImage::from_bytes(w, h, &bytes).unwrap();
            let decoded = decode_pgm(&encode_pgm(&img)).unwrap();
            prop_assert_eq!(decoded, img);
        }

        #[test]
        fn partition_then_assemble_is_identity(bw in 1usize..5, bh in 1usize..5, seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let img = GrayImage::from_fn(bw * 8, bh * 8, |_, _| rng.gen_range(-10.0..300.0)).unwrap();
            let blocks = partition_blocks(&img);
            prop_assert_eq!(assemble_blocks(img.width(), img.height(), &blocks).unwrap(), img);
        }
    }
}
