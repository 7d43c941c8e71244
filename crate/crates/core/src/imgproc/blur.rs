use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imgproc::ImageF32;

/// Sampled Gaussian truncated at `ceil(3 * sigma)` and renormalized to sum 1.
pub fn gaussian_kernel(sigma: f32) -> Result<Vec<f32>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "blur sigma must be positive, got {sigma}"
        )));
    }
    let radius = (3.0 * sigma as f64).ceil() as i64;
    let s2 = 2.0 * (sigma as f64) * (sigma as f64);
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / s2).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| (w / sum) as f32).collect())
}

/// Separable Gaussian blur of every channel with replicated borders.
pub fn gaussian_blur(img: &ImageF32, sigma: f32) -> Result<ImageF32> {
    let kernel = gaussian_kernel(sigma)?;
    let (h, w) = (img.height(), img.width());
    let mut out = Vec::with_capacity(img.data().len());
    for c in 0..img.channels() {
        out.extend(blur_plane(img.plane(c), h, w, &kernel));
    }
    Ok(ImageF32::from_raw(h, w, img.channels(), out))
}

pub(crate) fn blur_plane(src: &[f32], h: usize, w: usize, kernel: &[f32]) -> Vec<f32> {
    let radius = kernel.len() / 2;
    let mut tmp = vec![0.0f32; h * w];

    // Horizontal pass, rows padded by replication.
    tmp.par_chunks_mut(w).zip(src.par_chunks(w)).for_each_init(
        || vec![0.0f32; w + 2 * radius],
        |padded, (dst, row)| {
            padded[..radius].fill(row[0]);
            padded[radius..radius + w].copy_from_slice(row);
            padded[radius + w..].fill(row[w - 1]);
            for (x, d) in dst.iter_mut().enumerate() {
                let window = &padded[x..x + kernel.len()];
                *d = window.iter().zip(kernel).map(|(a, k)| a * k).sum();
            }
        },
    );

    // Vertical pass accumulates whole rows to stay cache friendly.
    let mut out = vec![0.0f32; h * w];
    out.par_chunks_mut(w).enumerate().for_each(|(y, dst)| {
        for (k, &weight) in kernel.iter().enumerate() {
            let sy = (y as isize + k as isize - radius as isize).clamp(0, h as isize - 1) as usize;
            let row = &tmp[sy * w..(sy + 1) * w];
            for (d, s) in dst.iter_mut().zip(row) {
                *d += weight * s;
            }
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_sums_to_one() {
        for &s in &[0.3f32, 0.5, 1.0, 1.6, 2.7, 5.0] {
            let k = gaussian_kernel(s).unwrap();
            assert_eq!(k.len(), 2 * (3.0 * s as f64).ceil() as usize + 1);
            let sum: f32 = k.iter().sum();
            assert!((sum - 1.0).abs() < 1e-6, "sigma {s}");
        }
    }

    #[test]
    fn rejects_non_positive_sigma() {
        assert!(gaussian_kernel(0.0).is_err());
        assert!(gaussian_kernel(-1.0).is_err());
        assert!(gaussian_blur(&ImageF32::zeros(3, 3, 1), f32::NAN).is_err());
    }

    #[test]
    fn constant_is_preserved() {
        let img = ImageF32::filled(9, 13, 3, 0.37);
        let out = gaussian_blur(&img, 2.2).unwrap();
        assert!(out.data().iter().all(|&v| (v - 0.37).abs() < 1e-6));
    }

    // Direct 2D evaluation of the truncated, renormalized kernel.
    fn dense_oracle(img: &ImageF32, sigma: f64) -> Vec<f64> {
        let r = (3.0 * sigma).ceil() as i64;
        let g: Vec<f64> = (-r..=r)
            .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
            .collect();
        let norm: f64 = g.iter().sum();
        let (h, w) = (img.height() as i64, img.width() as i64);
        let mut out = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for dy in -r..=r {
                    for dx in -r..=r {
                        let sy = (y + dy).clamp(0, h - 1) as usize;
                        let sx = (x + dx).clamp(0, w - 1) as usize;
                        let wgt = g[(dy + r) as usize] * g[(dx + r) as usize] / (norm * norm);
                        acc += wgt * img.get(0, sy, sx) as f64;
                    }
                }
                out.push(acc);
            }
        }
        out
    }

    #[test]
    fn impulse_matches_dense_convolution() {
        let mut img = ImageF32::zeros(11, 11, 1);
        img.set(0, 5, 5, 1.0);
        let out = gaussian_blur(&img, 1.0).unwrap();
        let want = dense_oracle(&img, 1.0);
        for (a, b) in out.data().iter().zip(&want) {
            assert!((*a as f64 - b).abs() < 1e-6);
        }
    }

    #[test]
    fn border_replication_matches_dense_convolution() {
        let img = ImageF32::from_fn(7, 9, 1, |_, y, x| ((y * 7 + x * 3) % 5) as f32 / 4.0);
        let out = gaussian_blur(&img, 1.3).unwrap();
        let want = dense_oracle(&img, 1.3);
        for (a, b) in out.data().iter().zip(&want) {
            assert!((*a as f64 - b).abs() < 1e-5);
        }
    }
}
