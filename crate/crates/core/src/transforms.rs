//! Orthonormal Haar wavelet analysis/synthesis, the seven-band second-level
//! decomposition used for embedding, and the 8×8 orthonormal DCT.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{GrayImage, Plane, BLOCK};

/// One level of a 2-D Haar decomposition.
///
/// For each 2×2 input cell `[[a, b], [c, d]]`:
/// `ll = (a+b+c+d)/2`, `hl = (a-b+c-d)/2`, `lh = (a+b-c-d)/2`, `hh = (a-b-c+d)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DwtLevel {
    pub ll: Plane,
    pub hl: Plane,
    pub lh: Plane,
    pub hh: Plane,
}

impl DwtLevel {
    pub fn energy(&self) -> f64 {
        self.ll.energy() + self.hl.energy() + self.lh.energy() + self.hh.energy()
    }
}

pub fn dwt2_forward(data: &Plane) -> Result<DwtLevel> {
    let (w, h) = (data.width(), data.height());
    if w == 0 || h == 0 || w % 2 != 0 || h % 2 != 0 {
        return Err(Error::ShapeMismatch(format!(
            "Haar analysis needs even dimensions, got {w}x{h}"
        )));
    }
    let (hw, hh_) = (w / 2, h / 2);
    let mut ll = Plane::zeros(hw, hh_);
    let mut hl = Plane::zeros(hw, hh_);
    let mut lh = Plane::zeros(hw, hh_);
    let mut hh = Plane::zeros(hw, hh_);
    for r in 0..hh_ {
        for c in 0..hw {
            let a = data.get(2 * r, 2 * c);
            let b = data.get(2 * r, 2 * c + 1);
            let cc = data.get(2 * r + 1, 2 * c);
            let d = data.get(2 * r + 1, 2 * c + 1);
            ll.set(r, c, (a + b + cc + d) * 0.5);
            hl.set(r, c, (a - b + cc - d) * 0.5);
            lh.set(r, c, (a + b - cc - d) * 0.5);
            hh.set(r, c, (a - b - cc + d) * 0.5);
        }
    }
    Ok(DwtLevel { ll, hl, lh, hh })
}

pub fn dwt2_inverse(level: &DwtLevel) -> Result<Plane> {
    let DwtLevel { ll, hl, lh, hh } = level;
    if !(ll.same_shape(hl) && ll.same_shape(lh) && ll.same_shape(hh)) {
        return Err(Error::ShapeMismatch(
            "Haar synthesis needs four equally sized sub-bands".into(),
        ));
    }
    let (hw, hh_) = (ll.width(), ll.height());
    let mut out = Plane::zeros(hw * 2, hh_ * 2);
    for r in 0..hh_ {
        for c in 0..hw {
            let (s, x, y, z) = (ll.get(r, c), hl.get(r, c), lh.get(r, c), hh.get(r, c));
            out.set(2 * r, 2 * c, (s + x + y + z) * 0.5);
            out.set(2 * r, 2 * c + 1, (s - x + y - z) * 0.5);
            out.set(2 * r + 1, 2 * c, (s + x - y - z) * 0.5);
            out.set(2 * r + 1, 2 * c + 1, (s - x - y + z) * 0.5);
        }
    }
    Ok(out)
}

/// First-level detail band a selected band was carved out of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandGroup {
    Hl,
    Lh,
    Hh,
}

/// The seven second-level sub-bands that carry the watermark.
///
/// Names read "level-2 band of level-1 band": `LlHl` is the LL band of the
/// level-1 HL band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Band {
    LlHl,
    HlHl,
    LhHl,
    LlLh,
    HlLh,
    LhLh,
    LlHh,
}

impl Band {
    pub const ALL: [Band; 7] = [
        Band::LlHl,
        Band::HlHl,
        Band::LhHl,
        Band::LlLh,
        Band::HlLh,
        Band::LhLh,
        Band::LlHh,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn group(self) -> BandGroup {
        match self {
            Band::LlHl | Band::HlHl | Band::LhHl => BandGroup::Hl,
            Band::LlLh | Band::HlLh | Band::LhLh => BandGroup::Lh,
            Band::LlHh => BandGroup::Hh,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Band::LlHl => "LLHL",
            Band::HlHl => "HLHL",
            Band::LhHl => "LHHL",
            Band::LlLh => "LLLH",
            Band::HlLh => "HLLH",
            Band::LhLh => "LHLH",
            Band::LlHh => "LLHH",
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The seven embedding bands, indexed by [`Band`].
#[derive(Clone, Debug, PartialEq)]
pub struct SubbandSet {
    bands: [Plane; 7],
}

impl SubbandSet {
    pub fn band(&self, band: Band) -> &Plane {
        &self.bands[band.index()]
    }

    pub fn band_mut(&mut self, band: Band) -> &mut Plane {
        &mut self.bands[band.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Band, &Plane)> {
        Band::ALL.into_iter().zip(self.bands.iter())
    }
}

/// Everything besides the seven selected bands needed for exact synthesis.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionContext {
    ll1: Plane,
    hh_of_hl: Plane,
    hh_of_lh: Plane,
    hl_of_hh: Plane,
    lh_of_hh: Plane,
    hh_of_hh: Plane,
}

/// Level-1 Haar of the image, then level-2 Haar of its HL, LH and HH bands.
pub fn decompose_to_subbands(img: &GrayImage) -> Result<(SubbandSet, ReconstructionContext)> {
    if img.width() % 16 != 0 || img.height() % 16 != 0 {
        return Err(Error::InvalidDimensions {
            width: img.width(),
            height: img.height(),
            reason: "two-level decomposition with 8x8 band blocks needs multiples of 16",
        });
    }
    let l1 = dwt2_forward(img.plane())?;
    let hl = dwt2_forward(&l1.hl)?;
    let lh = dwt2_forward(&l1.lh)?;
    let hh = dwt2_forward(&l1.hh)?;
    let bands = SubbandSet {
        bands: [
            hl.ll, hl.hl, hl.lh, lh.ll, lh.hl, lh.lh, hh.ll,
        ],
    };
    let ctx = ReconstructionContext {
        ll1: l1.ll,
        hh_of_hl: hl.hh,
        hh_of_lh: lh.hh,
        hl_of_hh: hh.hl,
        lh_of_hh: hh.lh,
        hh_of_hh: hh.hh,
    };
    Ok((bands, ctx))
}

/// Synthesizes the image from (possibly modified) bands and the untouched context.
///
/// The result is real-valued; no clamping or rounding is applied.
pub fn resynthesize(bands: &SubbandSet, ctx: &ReconstructionContext) -> Result<GrayImage> {
    let expected = (ctx.hh_of_hl.width(), ctx.hh_of_hl.height());
    for (band, plane) in bands.iter() {
        if (plane.width(), plane.height()) != expected {
            return Err(Error::ShapeMismatch(format!(
                "band {band} is {}x{}, context expects {}x{}",
                plane.width(),
                plane.height(),
                expected.0,
                expected.1
            )));
        }
    }
    let hl = dwt2_inverse(&DwtLevel {
        ll: bands.band(Band::LlHl).clone(),
        hl: bands.band(Band::HlHl).clone(),
        lh: bands.band(Band::LhHl).clone(),
        hh: ctx.hh_of_hl.clone(),
    })?;
    let lh = dwt2_inverse(&DwtLevel {
        ll: bands.band(Band::LlLh).clone(),
        hl: bands.band(Band::HlLh).clone(),
        lh: bands.band(Band::LhLh).clone(),
        hh: ctx.hh_of_lh.clone(),
    })?;
    let hh = dwt2_inverse(&DwtLevel {
        ll: bands.band(Band::LlHh).clone(),
        hl: ctx.hl_of_hh.clone(),
        lh: ctx.lh_of_hh.clone(),
        hh: ctx.hh_of_hh.clone(),
    })?;
    let image = dwt2_inverse(&DwtLevel {
        ll: ctx.ll1.clone(),
        hl,
        lh,
        hh,
    })?;
    GrayImage::from_plane(image)
}

/// 8×8 block of DCT coefficients; `get(r, c)` is the coefficient at row `r`, column `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DctBlock(pub [f64; 64]);

impl DctBlock {
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row * BLOCK + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.0[row * BLOCK + col] = value;
    }

    pub fn energy(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }
}

// basis[k][n] = s(k) cos((2n+1) k pi / 16)
fn dct_basis() -> &'static [[f64; 8]; 8] {
    static BASIS: OnceLock<[[f64; 8]; 8]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut m = [[0.0; 8]; 8];
        for (k, row) in m.iter_mut().enumerate() {
            let s = if k == 0 { (1.0f64 / 8.0).sqrt() } else { 0.5 };
            for (n, v) in row.iter_mut().enumerate() {
                *v = s * ((2 * n + 1) as f64 * k as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        m
    })
}

/// Orthonormal 2-D DCT-II of a row-major 8×8 block.
pub fn dct8_forward(block: &[f64; 64]) -> DctBlock {
    let m = dct_basis();
    // rows first, then columns
    let mut tmp = [0.0; 64];
    for r in 0..8 {
        for k in 0..8 {
            tmp[r * 8 + k] = (0..8).map(|n| m[k][n] * block[r * 8 + n]).sum();
        }
    }
    let mut out = [0.0; 64];
    for c in 0..8 {
        for k in 0..8 {
            out[k * 8 + c] = (0..8).map(|n| m[k][n] * tmp[n * 8 + c]).sum();
        }
    }
    DctBlock(out)
}

/// Inverse of [`dct8_forward`] (orthonormal DCT-III).
pub fn dct8_inverse(blk: &DctBlock) -> [f64; 64] {
    let m = dct_basis();
    let coeffs = &blk.0;
    let mut tmp = [0.0; 64];
    for c in 0..8 {
        for n in 0..8 {
            tmp[n * 8 + c] = (0..8).map(|k| m[k][n] * coeffs[k * 8 + c]).sum();
        }
    }
    let mut out = [0.0; 64];
    for r in 0..8 {
        for n in 0..8 {
            out[r * 8 + n] = (0..8).map(|k| m[k][n] * tmp[r * 8 + k]).sum();
        }
    }
    out
}

/// Reads the 8×8 block at block coordinates `(br, bc)` of a plane.
pub fn read_block(plane: &Plane, br: usize, bc: usize) -> [f64; 64] {
    let mut block = [0.0; 64];
    for r in 0..BLOCK {
        for c in 0..BLOCK {
            block[r * BLOCK + c] = plane.get(br * BLOCK + r, bc * BLOCK + c);
        }
    }
    block
}

pub fn write_block(plane: &mut Plane, br: usize, bc: usize, block: &[f64; 64]) {
    for r in 0..BLOCK {
        for c in 0..BLOCK {
            plane.set(br * BLOCK + r, bc * BLOCK + c, block[r * BLOCK + c]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_plane(w: usize, h: usize, seed: u64) -> Plane {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Plane::from_fn(w, h, |_, _| rng.gen_range(-100.0..300.0))
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    // direct O(N^4) DCT-II from the textbook definition
    fn dct_oracle(block: &[f64; 64]) -> [f64; 64] {
        let s = |k: usize| if k == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
        let mut out = [0.0; 64];
        for u in 0..8 {
            for v in 0..8 {
                let mut acc = 0.0;
                for x in 0..8 {
                    for y in 0..8 {
                        acc += block[x * 8 + y]
                            * ((2 * x + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0).cos()
                            * ((2 * y + 1) as f64 * v as f64 * std::f64::consts::PI / 16.0).cos();
                    }
                }
                out[u * 8 + v] = s(u) * s(v) * acc;
            }
        }
        out
    }

    #[test]
    fn constant_plane_has_only_ll() {
        let lvl = dwt2_forward(&Plane::filled(8, 6, 3.5)).unwrap();
        assert!(lvl.ll.data().iter().all(|&v| (v - 7.0).abs() < 1e-12));
        for d in [&lvl.hl, &lvl.lh, &lvl.hh] {
            assert!(d.data().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn unit_cell() {
        let lvl = dwt2_forward(&Plane::filled(2, 2, 1.0)).unwrap();
        assert_eq!(lvl.ll.data(), &[2.0]);
        assert_eq!(lvl.hl.data(), &[0.0]);
        assert_eq!(lvl.lh.data(), &[0.0]);
        assert_eq!(lvl.hh.data(), &[0.0]);
        let back = dwt2_inverse(&lvl).unwrap();
        assert_eq!(back.data(), &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn odd_dimensions_rejected() {
        assert!(dwt2_forward(&Plane::zeros(3, 4)).is_err());
    }

    #[test]
    fn inverse_shape_mismatch_rejected() {
        let lvl = DwtLevel {
            ll: Plane::zeros(2, 2),
            hl: Plane::zeros(2, 2),
            lh: Plane::zeros(2, 3),
            hh: Plane::zeros(2, 2),
        };
        assert!(dwt2_inverse(&lvl).is_err());
    }

    #[test]
    fn zero_bands_synthesize_zero() {
        let z = Plane::zeros(4, 4);
        let lvl = DwtLevel {
            ll: z.clone(),
            hl: z.clone(),
            lh: z.clone(),
            hh: z,
        };
        assert!(dwt2_inverse(&lvl).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn haar_parseval_random_8x8() {
        let p = random_plane(8, 8, 11);
        let direct: f64 = p.data().iter().map(|v| v * v).sum();
        let lvl = dwt2_forward(&p).unwrap();
        assert!(rel_close(lvl.energy(), direct, 1e-9));
    }

    #[test]
    fn decomposition_band_shapes() {
        let img = GrayImage::filled(512, 512, 90.0).unwrap();
        let (bands, _) = decompose_to_subbands(&img).unwrap();
        for (_, b) in bands.iter() {
            assert_eq!((b.width(), b.height()), (128, 128));
            assert!(b.data().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn decomposition_rejects_non_multiple_of_16() {
        let img = GrayImage::filled(24, 16, 0.0).unwrap();
        assert!(decompose_to_subbands(&img).is_err());
    }

    #[test]
    fn resynthesis_is_exact() {
        let img = GrayImage::from_plane(random_plane(64, 48, 3)).unwrap();
        let (bands, ctx) = decompose_to_subbands(&img).unwrap();
        let back = resynthesize(&bands, &ctx).unwrap();
        assert!(back.plane().max_abs_diff(img.plane()) < 1e-9);
    }

    #[test]
    fn zeroed_bands_on_constant_image() {
        let img = GrayImage::filled(32, 32, 77.0).unwrap();
        let (mut bands, ctx) = decompose_to_subbands(&img).unwrap();
        for b in Band::ALL {
            *bands.band_mut(b) = Plane::zeros(8, 8);
        }
        let back = resynthesize(&bands, &ctx).unwrap();
        assert!(back.plane().max_abs_diff(img.plane()) < 1e-9);
    }

    #[test]
    fn bands_are_orthogonal() {
        let img = GrayImage::from_plane(random_plane(64, 64, 5)).unwrap();
        let (mut bands, ctx) = decompose_to_subbands(&img).unwrap();
        let orig = bands.clone();
        let p = bands.band_mut(Band::LlHh);
        p.set(3, 2, p.get(3, 2) + 5.0);
        let modified = resynthesize(&bands, &ctx).unwrap();
        assert!(modified.plane().max_abs_diff(img.plane()) > 0.1);
        let (fresh, _) = decompose_to_subbands(&modified).unwrap();
        for band in Band::ALL {
            let diff = fresh.band(band).max_abs_diff(orig.band(band));
            if band == Band::LlHh {
                assert!((diff - 5.0).abs() < 1e-9);
            } else {
                assert!(diff < 1e-9, "{band} changed by {diff}");
            }
        }
    }

    #[test]
    fn dct_constant_block_is_dc_only() {
        let blk = dct8_forward(&[3.0; 64]);
        assert!((blk.get(0, 0) - 24.0).abs() < 1e-12);
        for i in 1..64 {
            assert!(blk.0[i].abs() < 1e-12);
        }
        assert_eq!(dct8_forward(&[0.0; 64]).0, [0.0; 64]);
    }

    #[test]
    fn dct_matches_direct_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut block = [0.0; 64];
        block.iter_mut().for_each(|v| *v = rng.gen_range(-50.0..50.0));
        let fast = dct8_forward(&block);
        let slow = dct_oracle(&block);
        for i in 0..64 {
            assert!((fast.0[i] - slow[i]).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn haar_round_trip(bw in 1usize..6, bh in 1usize..6, seed in any::<u64>()) {
            let p = random_plane(bw * 2, bh * 2, seed);
            let back = dwt2_inverse(&dwt2_forward(&p).unwrap()).unwrap();
            prop_assert!(back.max_abs_diff(&p) < 1e-9);
        }

        #[test]
        fn haar_energy_preserved(bw in 1usize..6, bh in 1usize..6, seed in any::<u64>()) {
            let p = random_plane(bw * 2, bh * 2, seed);
            prop_assert!(rel_close(dwt2_forward(&p).unwrap().energy(), p.energy(), 1e-9));
        }

        #[test]
        fn haar_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let x = random_plane(8, 8, seed);
            let y = random_plane(8, 8, seed.wrapping_add(1));
            let combo = Plane::from_fn(8, 8, |r, c| a * x.get(r, c) + b * y.get(r, c));
            let (tx, ty, tc) = (dwt2_forward(&x).unwrap(), dwt2_forward(&y).unwrap(), dwt2_forward(&combo).unwrap());
            for (px, py, pc) in [(&tx.ll, &ty.ll, &tc.ll), (&tx.hl, &ty.hl, &tc.hl), (&tx.lh, &ty.lh, &tc.lh), (&tx.hh, &ty.hh, &tc.hh)] {
                for i in 0..px.data().len() {
                    prop_assert!((a * px.data()[i] + b * py.data()[i] - pc.data()[i]).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn dct_round_trip_and_parseval(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut block = [0.0; 64];
            block.iter_mut().for_each(|v| *v = rng.gen_range(-255.0..255.0));
            let coeffs = dct8_forward(&block);
            let spatial: f64 = block.iter().map(|v| v * v).sum();
            prop_assert!(rel_close(coeffs.energy(), spatial, 1e-9));
            let back = dct8_inverse(&coeffs);
            for i in 0..64 {
                prop_assert!((back[i] - block[i]).abs() < 1e-9);
            }
        }
    }
}
