//! Per-block perceptual features feeding the fuzzy strength system: saliency,
//! mean intensity and edge concentration, each normalized to `[0, 1]`.

use std::collections::VecDeque;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{gaussian_kernel, separable_replicate};
use crate::image::{BlockGrid, GrayImage, Plane, BLOCK};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Saliency,
    Intensity,
    EdgeConcentration,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Saliency => "saliency",
            FeatureKind::Intensity => "intensity",
            FeatureKind::EdgeConcentration => "edge_concentration",
        }
    }
}

/// A block grid of one feature, every cell in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    pub kind: FeatureKind,
    pub grid: BlockGrid,
}

impl FeatureMap {
    pub fn new(kind: FeatureKind, grid: BlockGrid) -> Self {
        Self { kind, grid }
    }
}

/// Binary edge map with the same geometry as its source image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    edges: Vec<u8>,
}

impl EdgeMap {
    pub fn new(width: usize, height: usize, edges: Vec<u8>) -> Result<Self> {
        if edges.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} edge values for {width}x{height}",
                edges.len()
            )));
        }
        if edges.iter().any(|&e| e > 1) {
            return Err(Error::InvalidParameter("edge map must be binary".into()));
        }
        Ok(Self {
            width,
            height,
            edges,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.edges[row * self.width + col]
    }

    pub fn values(&self) -> &[u8] {
        &self.edges
    }

    pub fn count(&self) -> usize {
        self.edges.iter().map(|&e| e as usize).sum()
    }
}

/// Canny parameters; thresholds are fractions of the largest gradient magnitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CannyParams {
    pub sigma: f64,
    pub low: f64,
    pub high: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.4,
            low: 0.1,
            high: 0.2,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "canny sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(0.0 < self.low && self.low < self.high && self.high <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "canny thresholds need 0 < low < high <= 1, got low={} high={}",
                self.low, self.high
            )));
        }
        Ok(())
    }
}

/// Gaussian blur, Sobel gradients, non-maximum suppression and hysteresis.
pub fn canny(img: &GrayImage, params: &CannyParams) -> Result<EdgeMap> {
    params.validate()?;
    let (w, h) = (img.width(), img.height());
    let radius = (3.0 * params.sigma).ceil() as usize;
    let blurred = separable_replicate(img.plane(), &gaussian_kernel(params.sigma, radius));

    let mut gx = Plane::zeros(w, h);
    let mut gy = Plane::zeros(w, h);
    for r in 0..h as isize {
        for c in 0..w as isize {
            let p = |dr: isize, dc: isize| blurred.get_clamped(r + dr, c + dc);
            let x = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            let y = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            gx.set(r as usize, c as usize, x);
            gy.set(r as usize, c as usize, y);
        }
    }
    let mag = Plane::from_fn(w, h, |r, c| gx.get(r, c).hypot(gy.get(r, c)));
    let max_mag = mag.data().iter().copied().fold(0.0, f64::max);
    if max_mag <= 0.0 {
        return EdgeMap::new(w, h, vec![0; w * h]);
    }

    // Suppress everything that is not a ridge along the gradient direction.
    // Ties are broken toward the pixel on the positive side so that a
    // symmetric ridge two pixels wide yields a single line.
    let mut thin = Plane::zeros(w, h);
    for r in 0..h {
        for c in 0..w {
            let m = mag.get(r, c);
            if m == 0.0 {
                continue;
            }
            let mut angle = gy.get(r, c).atan2(gx.get(r, c)).to_degrees();
            if angle < 0.0 {
                angle += 180.0;
            }
            let (dr, dc): (isize, isize) = if !(22.5..157.5).contains(&angle) {
                (0, 1)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (1, 0)
            } else {
                (1, -1)
            };
            let at = |sign: isize| {
                let rr = r as isize + sign * dr;
                let cc = c as isize + sign * dc;
                if rr < 0 || cc < 0 || rr >= h as isize || cc >= w as isize {
                    0.0
                } else {
                    mag.get(rr as usize, cc as usize)
                }
            };
            if m >= at(-1) && m > at(1) {
                thin.set(r, c, m);
            }
        }
    }

    let high = params.high * max_mag;
    let low = params.low * max_mag;
    let mut edges = vec![0u8; w * h];
    let mut queue = VecDeque::new();
    for (i, &m) in thin.data().iter().enumerate() {
        if m >= high {
            edges[i] = 1;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (r, c) = ((i / w) as isize, (i % w) as isize);
        for dr in -1..=1 {
            for dc in -1..=1 {
                let (rr, cc) = (r + dr, c + dc);
                if rr < 0 || cc < 0 || rr >= h as isize || cc >= w as isize {
                    continue;
                }
                let j = rr as usize * w + cc as usize;
                if edges[j] == 0 && thin.data()[j] >= low {
                    edges[j] = 1;
                    queue.push_back(j);
                }
            }
        }
    }
    EdgeMap::new(w, h, edges)
}

/// Block-level mean of the 3×3 local variance of a binary edge map, max-normalized.
pub fn edge_concentration_from_edges(edges: &EdgeMap) -> Result<FeatureMap> {
    let (w, h) = (edges.width(), edges.height());
    if w % BLOCK != 0 || h % BLOCK != 0 || w == 0 || h == 0 {
        return Err(Error::DimensionsNotMultipleOf8 {
            width: w,
            height: h,
        });
    }
    let (rows, cols) = (h / BLOCK, w / BLOCK);
    let mut cells = vec![0.0; rows * cols];
    for r in 0..h {
        for c in 0..w {
            // zero padding outside the image
            let mut ones = 0u32;
            for dr in -1isize..=1 {
                for dc in -1isize..=1 {
                    let (rr, cc) = (r as isize + dr, c as isize + dc);
                    if rr >= 0 && cc >= 0 && (rr as usize) < h && (cc as usize) < w {
                        ones += u32::from(edges.get(rr as usize, cc as usize));
                    }
                }
            }
            // population variance of a 0/1 sample with `ones` ones out of 9
            let p = f64::from(ones) / 9.0;
            cells[(r / BLOCK) * cols + c / BLOCK] += p - p * p;
        }
    }
    let max = cells.iter().copied().fold(0.0, f64::max);
    for v in &mut cells {
        *v = if max > 0.0 { *v / max } else { 0.0 };
    }
    Ok(FeatureMap::new(
        FeatureKind::EdgeConcentration,
        BlockGrid::new(rows, cols, cells)?,
    ))
}

pub fn edge_concentration(img: &GrayImage, params: &CannyParams) -> Result<FeatureMap> {
    edge_concentration_from_edges(&canny(img, params)?)
}

/// Mean sample of each 8×8 block divided by 255.
pub fn intensity_map(img: &GrayImage) -> FeatureMap {
    let grid = block_means(img);
    let cells = grid.cells().iter().map(|v| (v / 255.0).clamp(0.0, 1.0)).collect();
    let (rows, cols) = img.block_dims();
    FeatureMap::new(
        FeatureKind::Intensity,
        BlockGrid::new(rows, cols, cells).expect("grid shape matches image blocks"),
    )
}

fn block_means(img: &GrayImage) -> BlockGrid {
    let (rows, cols) = img.block_dims();
    let mut cells = vec![0.0; rows * cols];
    for r in 0..img.height() {
        for c in 0..img.width() {
            cells[(r / BLOCK) * cols + c / BLOCK] += img.get(r, c);
        }
    }
    cells.iter_mut().for_each(|v| *v /= (BLOCK * BLOCK) as f64);
    BlockGrid::new(rows, cols, cells).expect("grid shape matches image blocks")
}

/// Anything that can produce a block-level saliency map.
pub trait SaliencyModel {
    fn saliency(&self, img: &GrayImage) -> Result<FeatureMap>;
}

/// Spectral-residual saliency computed directly at block resolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralResidual {
    /// Smoothing of the squared reconstruction, in grid cells.
    pub smoothing_sigma: f64,
}

impl Default for SpectralResidual {
    fn default() -> Self {
        Self {
            smoothing_sigma: 2.5,
        }
    }
}

impl SaliencyModel for SpectralResidual {
    fn saliency(&self, img: &GrayImage) -> Result<FeatureMap> {
        let means = block_means(img);
        let (rows, cols) = (means.rows(), means.cols());
        let zero = || {
            FeatureMap::new(
                FeatureKind::Saliency,
                BlockGrid::filled(rows, cols, 0.0),
            )
        };
        if means.max() - means.min() <= 0.0 {
            return Ok(zero());
        }
        let mean = means.cells().iter().sum::<f64>() / (rows * cols) as f64;
        let mut spectrum: Vec<Complex<f64>> = means
            .cells()
            .iter()
            .map(|&v| Complex::new(v - mean, 0.0))
            .collect();
        fft2(&mut spectrum, rows, cols, false);
        spectrum[0] = Complex::new(0.0, 0.0);

        let log_amp: Vec<f64> = spectrum.iter().map(|z| z.norm().ln_1p()).collect();
        // 3x3 box average over the periodic spectrum
        let mut residual = vec![0.0; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                let mut acc = 0.0;
                for dr in [rows - 1, 0, 1] {
                    for dc in [cols - 1, 0, 1] {
                        acc += log_amp[((r + dr) % rows) * cols + (c + dc) % cols];
                    }
                }
                residual[r * cols + c] = log_amp[r * cols + c] - acc / 9.0;
            }
        }
        let mut recon: Vec<Complex<f64>> = spectrum
            .iter()
            .zip(&residual)
            .map(|(z, &res)| {
                // bins without energy (including the removed mean) have no phase to keep
                if z.norm() == 0.0 {
                    Complex::new(0.0, 0.0)
                } else {
                    Complex::from_polar(res.exp(), z.arg())
                }
            })
            .collect();
        fft2(&mut recon, rows, cols, true);

        let energy = Plane::from_vec(cols, rows, recon.iter().map(|z| z.norm_sqr()).collect())?;
        let radius = (3.0 * self.smoothing_sigma).ceil() as usize;
        let smooth = separable_replicate(&energy, &gaussian_kernel(self.smoothing_sigma, radius));
        let (lo, hi) = smooth
            .data()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if hi - lo <= f64::EPSILON * hi.abs() {
            return Ok(zero());
        }
        let cells = smooth.data().iter().map(|v| (v - lo) / (hi - lo)).collect();
        Ok(FeatureMap::new(
            FeatureKind::Saliency,
            BlockGrid::new(rows, cols, cells)?,
        ))
    }
}

pub fn saliency_map(img: &GrayImage) -> Result<FeatureMap> {
    SpectralResidual::default().saliency(img)
}

fn fft2(data: &mut [Complex<f64>], rows: usize, cols: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let (row_fft, col_fft) = if inverse {
        (planner.plan_fft_inverse(cols), planner.plan_fft_inverse(rows))
    } else {
        (planner.plan_fft_forward(cols), planner.plan_fft_forward(rows))
    };
    for row in data.chunks_exact_mut(cols) {
        row_fft.process(row);
    }
    let mut column = vec![Complex::new(0.0, 0.0); rows];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = data[r * cols + c];
        }
        col_fft.process(&mut column);
        for r in 0..rows {
            data[r * cols + c] = column[r];
        }
    }
    if inverse {
        let scale = 1.0 / (rows * cols) as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }
}

/// All three feature maps of an image.
#[derive(Clone, Debug, PartialEq)]
pub struct Features {
    pub saliency: FeatureMap,
    pub edge: FeatureMap,
    pub intensity: FeatureMap,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub canny: CannyParams,
    pub saliency: SpectralResidual,
}

pub fn extract_features(img: &GrayImage, cfg: &FeatureConfig) -> Result<Features> {
    Ok(Features {
        saliency: cfg.saliency.saliency(img)?,
        edge: edge_concentration(img, &cfg.canny)?,
        intensity: intensity_map(img),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GrayImage::from_fn(w, h, |_, _| f64::from(rng.gen::<u8>())).unwrap()
    }

    // smooth blobs plus noise, closer to natural statistics than white noise
    fn textured_image(seed: u64) -> GrayImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blobs: Vec<(f64, f64, f64, f64)> = (0..12)
            .map(|_| {
                (
                    rng.gen_range(0.0..128.0),
                    rng.gen_range(0.0..128.0),
                    rng.gen_range(4.0..20.0),
                    rng.gen_range(-120.0..120.0),
                )
            })
            .collect();
        GrayImage::from_fn(128, 128, |r, c| {
            let v: f64 = blobs
                .iter()
                .map(|&(y, x, s, a)| {
                    a * (-((r as f64 - y).powi(2) + (c as f64 - x).powi(2)) / (2.0 * s * s)).exp()
                })
                .sum();
            (128.0 + v + rng.gen_range(-5.0..5.0)).clamp(0.0, 255.0)
        })
        .unwrap()
    }

    #[test]
    fn canny_constant_image_has_no_edges() {
        let img = GrayImage::filled(64, 64, 100.0).unwrap();
        assert_eq!(canny(&img, &CannyParams::default()).unwrap().count(), 0);
    }

    #[test]
    fn canny_rejects_bad_thresholds() {
        let img = GrayImage::filled(8, 8, 0.0).unwrap();
        for (low, high) in [(0.3, 0.2), (0.0, 0.2), (0.1, 1.5), (0.2, 0.2)] {
            let p = CannyParams {
                low,
                high,
                ..Default::default()
            };
            assert!(canny(&img, &p).is_err(), "low={low} high={high}");
        }
    }

    #[test]
    fn canny_vertical_step_gives_single_line() {
        let img = GrayImage::from_fn(64, 32, |_, c| if c < 32 { 0.0 } else { 255.0 }).unwrap();
        let edges = canny(&img, &CannyParams::default()).unwrap();
        // oracle: columns where the central difference of the raw step is largest
        let diff = |c: usize| img.get(0, (c + 1).min(63)) - img.get(0, c.saturating_sub(1));
        let best = (0..64).map(diff).fold(0.0, f64::max);
        let ridge: Vec<usize> = (0..64).filter(|&c| diff(c) == best).collect();
        assert_eq!(ridge, vec![31, 32]);
        for r in 0..32 {
            let cols: Vec<usize> = (0..64).filter(|&c| edges.get(r, c) == 1).collect();
            assert_eq!(cols.len(), 1, "row {r}: {cols:?}");
            assert!(ridge.contains(&cols[0]));
        }
    }

    #[test]
    fn canny_output_is_binary() {
        let edges = canny(&random_image(32, 32, 1), &CannyParams::default()).unwrap();
        assert!(edges.values().iter().all(|&e| e <= 1));
        let again = EdgeMap::new(32, 32, edges.values().iter().map(|&e| (e > 0) as u8).collect());
        assert_eq!(again.unwrap(), edges);
    }

    #[test]
    fn edge_free_image_has_zero_concentration() {
        let map = edge_concentration_from_edges(&EdgeMap::new(32, 32, vec![0; 1024]).unwrap())
            .unwrap();
        assert!(map.grid.cells().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_edge_block_normalizes_to_one() {
        let mut e = vec![0u8; 32 * 32];
        // a short segment strictly inside block (1, 2)
        for c in 18..22 {
            e[11 * 32 + c] = 1;
        }
        let map = edge_concentration_from_edges(&EdgeMap::new(32, 32, e).unwrap()).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let v = map.grid.get(r, c);
                if (r, c) == (1, 2) {
                    assert_eq!(v, 1.0);
                } else {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    // brute-force 3x3 window variance, independent of the ones-count shortcut
    fn block_variance_oracle(edges: &EdgeMap, br: usize, bc: usize) -> f64 {
        let mut total = 0.0;
        for r in br * 8..br * 8 + 8 {
            for c in bc * 8..bc * 8 + 8 {
                let mut window = Vec::with_capacity(9);
                for dr in -1isize..=1 {
                    for dc in -1isize..=1 {
                        let (rr, cc) = (r as isize + dr, c as isize + dc);
                        let inside = rr >= 0
                            && cc >= 0
                            && (rr as usize) < edges.height()
                            && (cc as usize) < edges.width();
                        window.push(if inside {
                            f64::from(edges.get(rr as usize, cc as usize))
                        } else {
                            0.0
                        });
                    }
                }
                let mean = window.iter().sum::<f64>() / 9.0;
                total += window.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 9.0;
            }
        }
        total / 64.0
    }

    #[test]
    fn checkerboard_block_matches_brute_force() {
        let mut e = vec![0u8; 24 * 24];
        for r in 8..16 {
            for c in 8..16 {
                e[r * 24 + c] = ((r + c) % 2) as u8;
            }
        }
        let edges = EdgeMap::new(24, 24, e).unwrap();
        let map = edge_concentration_from_edges(&edges).unwrap();
        let raw: Vec<f64> = (0..9)
            .map(|i| block_variance_oracle(&edges, i / 3, i % 3))
            .collect();
        let max = raw.iter().copied().fold(0.0, f64::max);
        assert_eq!(max, raw[4]);
        for i in 0..9 {
            assert!((map.grid.get(i / 3, i % 3) - raw[i] / max).abs() < 1e-12);
        }
        // interior pixel of a checkerboard: 4 or 5 ones out of 9
        let p: f64 = 4.0 / 9.0;
        assert!((p - p * p - 20.0 / 81.0).abs() < 1e-15);
    }

    #[test]
    fn intensity_examples() {
        let white = intensity_map(&GrayImage::filled(16, 16, 255.0).unwrap());
        assert!(white.grid.cells().iter().all(|&v| v == 1.0));
        let black = intensity_map(&GrayImage::filled(16, 16, 0.0).unwrap());
        assert!(black.grid.cells().iter().all(|&v| v == 0.0));
        let half = intensity_map(&GrayImage::from_fn(8, 8, |_, c| if c < 4 { 0.0 } else { 255.0 }).unwrap());
        assert_eq!(half.grid.get(0, 0), 0.5);
    }

    #[test]
    fn intensity_is_block_equivariant() {
        let img = random_image(32, 32, 4);
        let map = intensity_map(&img);
        // swap blocks (0,0) and (3,2)
        let swapped = GrayImage::from_fn(32, 32, |r, c| {
            let (br, bc) = (r / 8, c / 8);
            let (sr, sc) = match (br, bc) {
                (0, 0) => (3, 2),
                (3, 2) => (0, 0),
                other => other,
            };
            img.get(sr * 8 + r % 8, sc * 8 + c % 8)
        })
        .unwrap();
        let smap = intensity_map(&swapped);
        assert_eq!(smap.grid.get(0, 0), map.grid.get(3, 2));
        assert_eq!(smap.grid.get(3, 2), map.grid.get(0, 0));
        assert_eq!(smap.grid.get(1, 1), map.grid.get(1, 1));
    }

    #[test]
    fn saliency_constant_image_is_zero() {
        let map = saliency_map(&GrayImage::filled(64, 64, 80.0).unwrap()).unwrap();
        assert!(map.grid.cells().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn saliency_highlights_isolated_square() {
        let img = GrayImage::from_fn(512, 512, |r, c| {
            if (200..232).contains(&r) && (300..332).contains(&c) {
                255.0
            } else {
                0.0
            }
        })
        .unwrap();
        let map = saliency_map(&img).unwrap();
        assert_eq!((map.grid.rows(), map.grid.cols()), (64, 64));
        let mut background: Vec<f64> = Vec::new();
        for r in 0..64 {
            for c in 0..64 {
                if !((25..29).contains(&r) && (37..42).contains(&c)) {
                    background.push(map.grid.get(r, c));
                }
            }
        }
        background.sort_by(f64::total_cmp);
        let median = background[background.len() / 2];
        for r in 25..29 {
            for c in 37..41 {
                assert!(map.grid.get(r, c) > median, "cell ({r},{c})");
            }
        }
    }

    #[test]
    fn saliency_range_is_unit_interval() {
        let map = saliency_map(&textured_image(2)).unwrap();
        assert!((map.grid.min() - 0.0).abs() < 1e-15);
        assert!((map.grid.max() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_maps_are_64x64_for_512_input() {
        let img = random_image(512, 512, 8);
        let f = extract_features(&img, &FeatureConfig::default()).unwrap();
        for m in [&f.saliency, &f.edge, &f.intensity] {
            assert_eq!((m.grid.rows(), m.grid.cols()), (64, 64));
            assert!(m.grid.cells().iter().all(|v| (0.0..=1.0).contains(v)));
        }
        assert_eq!(f.edge.grid.max(), 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn saliency_invariant_under_inversion(seed in any::<u64>()) {
            let img = textured_image(seed);
            let inv = GrayImage::from_fn(128, 128, |r, c| 255.0 - img.get(r, c)).unwrap();
            let a = saliency_map(&img).unwrap();
            let b = saliency_map(&inv).unwrap();
            for (x, y) in a.grid.cells().iter().zip(b.grid.cells()) {
                prop_assert!((x - y).abs() < 1e-6);
            }
        }

        #[test]
        fn adding_edges_to_an_isolated_block_never_lowers_it(seed in any::<u64>(), extra in 1usize..20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut e = vec![0u8; 32 * 32];
            let inside = |rng: &mut ChaCha8Rng| (rng.gen_range(9..15), rng.gen_range(17..23));
            let (r0, c0) = inside(&mut rng);
            e[r0 * 32 + c0] = 1;
            let before = block_variance_oracle(&EdgeMap::new(32, 32, e.clone()).unwrap(), 1, 2);
            for _ in 0..extra {
                let (r, c) = inside(&mut rng);
                e[r * 32 + c] = 1;
            }
            let edges = EdgeMap::new(32, 32, e).unwrap();
            let map = edge_concentration_from_edges(&edges).unwrap();
            prop_assert!(before > 0.0);
            prop_assert_eq!(map.grid.get(1, 2), 1.0);
            prop_assert_eq!(map.grid.cells().iter().filter(|&&v| v > 0.0).count(), 1);
        }
    }
}
