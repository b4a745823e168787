//! Separable convolution helpers shared by the feature, attack and metric code.

use crate::image::Plane;

/// Sampled Gaussian of the given radius, normalized to unit sum.
pub fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f64> {
    let mut k: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|x| (-((x * x) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Convolves rows then columns with `kernel` (odd length), replicating border samples.
pub fn separable_replicate(src: &Plane, kernel: &[f64]) -> Plane {
    let radius = (kernel.len() / 2) as isize;
    let (w, h) = (src.width(), src.height());
    let mut tmp = Plane::zeros(w, h);
    for r in 0..h {
        for c in 0..w {
            let acc: f64 = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * src.get_clamped(r as isize, c as isize + i as isize - radius))
                .sum();
            tmp.set(r, c, acc);
        }
    }
    let mut out = Plane::zeros(w, h);
    for r in 0..h {
        for c in 0..w {
            let acc: f64 = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * tmp.get_clamped(r as isize + i as isize - radius, c as isize))
                .sum();
            out.set(r, c, acc);
        }
    }
    out
}

/// Convolves with `kernel` keeping only positions where it fits entirely ("valid" mode).
pub fn separable_valid(src: &Plane, kernel: &[f64]) -> Plane {
    let n = kernel.len();
    let (w, h) = (src.width() + 1 - n, src.height() + 1 - n);
    let mut tmp = Plane::zeros(w, src.height());
    for r in 0..src.height() {
        for c in 0..w {
            let acc: f64 = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * src.get(r, c + i))
                .sum();
            tmp.set(r, c, acc);
        }
    }
    let mut out = Plane::zeros(w, h);
    for r in 0..h {
        for c in 0..w {
            let acc: f64 = kernel
                .iter()
                .enumerate()
                .map(|(i, k)| k * tmp.get(r + i, c))
                .sum();
            out.set(r, c, acc);
        }
    }
    out
}
