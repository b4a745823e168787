//! Imperceptibility and robustness measures.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::{gaussian_kernel, separable_valid};
use crate::image::{GrayImage, WatermarkBits};

fn check_shape(a: &GrayImage, b: &GrayImage) -> Result<()> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Peak signal-to-noise ratio in dB with peak 255; infinite for identical images.
pub fn psnr(reference: &GrayImage, test: &GrayImage) -> Result<f64> {
    check_shape(reference, test)?;
    let mse = reference
        .samples()
        .iter()
        .zip(test.samples())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / reference.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

/// Mean structural similarity with an 11×11 Gaussian window (σ = 1.5),
/// averaged over the positions where the window fits inside the image.
pub fn mssim(reference: &GrayImage, test: &GrayImage) -> Result<f64> {
    check_shape(reference, test)?;
    if reference.width() < 11 || reference.height() < 11 {
        return Err(Error::InvalidDimensions {
            width: reference.width(),
            height: reference.height(),
            reason: "SSIM needs at least 11x11 pixels",
        });
    }
    let c1 = (0.01f64 * 255.0).powi(2);
    let c2 = (0.03f64 * 255.0).powi(2);
    let k = gaussian_kernel(1.5, 5);
    let (x, y) = (reference.plane(), test.plane());
    let mu_x = separable_valid(x, &k);
    let mu_y = separable_valid(y, &k);
    let xx = separable_valid(&x.map(|v| v * v), &k);
    let yy = separable_valid(&y.map(|v| v * v), &k);
    let xy_plane = crate::image::Plane::from_fn(x.width(), x.height(), |r, c| x.get(r, c) * y.get(r, c));
    let xy = separable_valid(&xy_plane, &k);
    let n = mu_x.data().len();
    let mut total = 0.0;
    for i in 0..n {
        let (mx, my) = (mu_x.data()[i], mu_y.data()[i]);
        let sx = xx.data()[i] - mx * mx;
        let sy = yy.data()[i] - my * my;
        let sxy = xy.data()[i] - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sx + sy + c2));
    }
    Ok(total / n as f64)
}

/// Normalized correlation between two bit strings: the fraction of agreeing bits.
pub fn nc(original: &WatermarkBits, recovered: &WatermarkBits) -> Result<f64> {
    if original.len() != recovered.len() {
        return Err(Error::PayloadLength {
            expected: original.len(),
            found: recovered.len(),
        });
    }
    let diff = original
        .bits()
        .iter()
        .zip(recovered.bits())
        .filter(|(a, b)| a != b)
        .count();
    Ok(1.0 - diff as f64 / original.len() as f64)
}

/// Bit error rate in percent.
pub fn ber(original: &WatermarkBits, recovered: &WatermarkBits) -> Result<f64> {
    Ok((1.0 - nc(original, recovered)?) * 100.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub nc: f64,
    pub ber: f64,
    pub psnr: f64,
    pub mssim: f64,
}

impl MetricReport {
    pub fn compute(
        cover: &GrayImage,
        attacked: &GrayImage,
        original: &WatermarkBits,
        recovered: &WatermarkBits,
    ) -> Result<Self> {
        let nc = nc(original, recovered)?;
        Ok(Self {
            nc,
            ber: (1.0 - nc) * 100.0,
            psnr: psnr(cover, attacked)?,
            mssim: mssim(cover, attacked)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(s: &str) -> WatermarkBits {
        s.parse().unwrap()
    }

    #[test]
    fn psnr_examples() {
        let a = GrayImage::filled(16, 16, 100.0).unwrap();
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let b = GrayImage::filled(16, 16, 101.0).unwrap();
        // mse 1 -> 20 log10(255)
        assert!((psnr(&a, &b).unwrap() - 48.130803608679106).abs() < 1e-9);
        assert!(psnr(&a, &GrayImage::filled(8, 16, 1.0).unwrap()).is_err());
    }

    #[test]
    fn nc_and_ber_examples() {
        assert_eq!(nc(&bits("1010"), &bits("1010")).unwrap(), 1.0);
        assert_eq!(nc(&bits("1010"), &bits("0101")).unwrap(), 0.0);
        assert_eq!(nc(&bits("1111"), &bits("1110")).unwrap(), 0.75);
        assert_eq!(ber(&bits("1111"), &bits("1110")).unwrap(), 25.0);
        assert!(nc(&bits("11"), &bits("111")).is_err());
    }

    /// Plain windowed SSIM computed pixel by pixel.
    fn ssim_oracle(a: &GrayImage, b: &GrayImage) -> f64 {
        let mut w = [[0.0; 11]; 11];
        let mut sum = 0.0;
        for (i, row) in w.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
                *v = (-(di * di + dj * dj) / (2.0 * 1.5 * 1.5)).exp();
                sum += *v;
            }
        }
        let (c1, c2) = (6.5025, 58.5225);
        let mut total = 0.0;
        let mut count = 0;
        for r in 0..=a.height() - 11 {
            for c in 0..=a.width() - 11 {
                let (mut mx, mut my, mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for i in 0..11 {
                    for j in 0..11 {
                        let k = w[i][j] / sum;
                        let (x, y) = (a.get(r + i, c + j), b.get(r + i, c + j));
                        mx += k * x;
                        my += k * y;
                        xx += k * x * x;
                        yy += k * y * y;
                        xy += k * x * y;
                    }
                }
                let (sx, sy, sxy) = (xx - mx * mx, yy - my * my, xy - mx * my);
                total += (2.0 * mx * my + c1) * (2.0 * sxy + c2) / ((mx * mx + my * my + c1) * (sx + sy + c2));
                count += 1;
            }
        }
        total / count as f64
    }

    #[test]
    fn mssim_matches_oracle() {
        let a = GrayImage::from_fn(24, 24, |r, c| ((r * 13 + c * 29) % 256) as f64).unwrap();
        let b = GrayImage::from_fn(24, 24, |r, c| ((r * 13 + c * 29 + (r ^ c)) % 256) as f64).unwrap();
        assert!((mssim(&a, &b).unwrap() - ssim_oracle(&a, &b)).abs() < 1e-10);
        assert_eq!(mssim(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn eight_mismatches() {
        let a = WatermarkBits::zeros(128);
        let b = WatermarkBits::new((0..128).map(|i| u8::from(i % 16 == 3)).collect()).unwrap();
        assert_eq!(nc(&a, &b).unwrap(), 0.9375);
        assert_eq!(ber(&a, &b).unwrap(), 6.25);
        assert_eq!(ber(&a, &a.complement()).unwrap(), 100.0);
    }

    #[test]
    fn inversion_lowers_mssim() {
        let a = GrayImage::from_fn(32, 32, |r, c| ((r * 9 + c * 5) % 200) as f64).unwrap();
        let inv = GrayImage::from_fn(32, 32, |r, c| 255.0 - a.get(r, c)).unwrap();
        assert!(mssim(&a, &inv).unwrap() < 1.0);
    }

    #[test]
    fn psnr_falls_with_noise_amplitude() {
        let a = GrayImage::from_fn(32, 32, |r, c| (100 + (r * c) % 50) as f64).unwrap();
        let mut last = f64::INFINITY;
        for amp in 1..10 {
            let b = GrayImage::from_fn(32, 32, |r, c| a.get(r, c) + if (r + c) % 2 == 0 { amp as f64 } else { -(amp as f64) }).unwrap();
            let p = psnr(&a, &b).unwrap();
            assert!(p < last);
            last = p;
        }
    }

    proptest! {
        #[test]
        fn psnr_matches_mse_oracle(seed in any::<u64>()) {
            let a = GrayImage::from_fn(8, 8, |r, c| ((r * 37 + c * 11 + seed as usize) % 256) as f64).unwrap();
            let b = GrayImage::from_fn(8, 8, |r, c| ((r * 3 + c * 59 + (seed >> 7) as usize) % 256) as f64).unwrap();
            let mut sse = 0.0;
            for r in 0..8 {
                for c in 0..8 {
                    sse += (a.get(r, c) - b.get(r, c)).powi(2);
                }
            }
            let p = psnr(&a, &b).unwrap();
            if sse == 0.0 {
                prop_assert!(p.is_infinite());
            } else {
                prop_assert!((p - 10.0 * (65025.0 / (sse / 64.0)).log10()).abs() < 1e-9);
            }
        }

        #[test]
        fn mssim_symmetric_and_bounded(seed in any::<u64>()) {
            let a = GrayImage::from_fn(16, 16, |r, c| ((r * 7 + c * 11 + seed as usize) % 256) as f64).unwrap();
            let b = GrayImage::from_fn(16, 16, |r, c| ((r * 5 + c * 3 + (seed >> 8) as usize) % 256) as f64).unwrap();
            let ab = mssim(&a, &b).unwrap();
            prop_assert!((ab - mssim(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!(ab <= 1.0 + 1e-12 && ab >= -1.0);
        }

        #[test]
        fn ber_complements_nc(v in proptest::collection::vec(0u8..=1, 1..64), flips in proptest::collection::vec(any::<bool>(), 64)) {
            let a = WatermarkBits::new(v.clone()).unwrap();
            let b = WatermarkBits::new(v.iter().zip(&flips).map(|(&x, &f)| if f { 1 - x } else { x }).collect()).unwrap();
            let n = nc(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&n));
            prop_assert!((ber(&a, &b).unwrap() - (1.0 - n) * 100.0).abs() < 1e-12);
        }
    }
}
