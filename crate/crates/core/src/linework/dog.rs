use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::{self, gaussian_kernel, BinaryMask, ImageF32};
use crate::linework::BinarySketch;

/// Image height at which [`DogParams::default`] sigma applies.
pub const REFERENCE_HEIGHT: f32 = 540.0;

/// Difference-of-Gaussians line extractor settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DogParams {
    /// Base blur sigma in pixels.
    pub sigma: f32,
    /// Ratio between the wide and narrow blur, greater than one.
    pub k_ratio: f32,
    pub t_gain: f32,
    pub epsilon: f32,
}

impl Default for DogParams {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            k_ratio: 1.6,
            t_gain: 2.0,
            epsilon: 0.01,
        }
    }
}

impl DogParams {
    /// Same parameters with sigma scaled from the 540-row reference to `height`.
    pub fn scaled_to_height(&self, height: usize) -> Self {
        Self {
            sigma: self.sigma * height as f32 / REFERENCE_HEIGHT,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "DoG sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.k_ratio > 1.0) || !self.k_ratio.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "DoG k ratio must exceed 1, got {}",
                self.k_ratio
            )));
        }
        if !self.t_gain.is_finite() || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(
                "DoG gain and offset must be finite".into(),
            ));
        }
        Ok(())
    }
}

fn luminance(img: &ImageF32) -> Result<ImageF32> {
    match img.channels() {
        3 => imgproc::to_grayscale(img),
        1 => Ok(img.clone()),
        c => Err(Error::InvalidInput(format!(
            "line extraction needs 1 or 3 channels, got {c}"
        ))),
    }
}

/// `0.5 + t * (G_{k sigma}(gray) - G_sigma(gray)) - epsilon`, single channel.
pub fn dog_response(img: &ImageF32, params: &DogParams) -> Result<ImageF32> {
    params.validate()?;
    let gray = luminance(img)?;
    let (h, w) = (gray.height(), gray.width());
    let narrow = imgproc::blur::blur_plane(gray.plane(0), h, w, &gaussian_kernel(params.sigma)?);
    let wide = imgproc::blur::blur_plane(
        gray.plane(0),
        h,
        w,
        &gaussian_kernel(params.sigma * params.k_ratio)?,
    );
    let data = wide
        .iter()
        .zip(&narrow)
        .map(|(&wd, &nr)| 0.5 + params.t_gain * (wd - nr) - params.epsilon)
        .collect();
    Ok(ImageF32::from_raw(h, w, 1, data))
}

/// Binary sketch of pixels whose DoG response exceeds 0.5.
pub fn extract_sketch(img: &ImageF32, params: &DogParams) -> Result<BinarySketch> {
    let resp = dog_response(img, params)?;
    Ok(BinaryMask::from_raw(
        resp.height(),
        resp.width(),
        resp.data().iter().map(|&v| v > 0.5).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_image(h: usize, w: usize, col: usize) -> ImageF32 {
        ImageF32::from_fn(h, w, 3, |_, _, x| if x == col { 0.0 } else { 1.0 })
    }

    // Dense 2D convolution with replicated borders, no separability.
    fn dense_blur(gray: &ImageF32, sigma: f64) -> Vec<f64> {
        let r = (3.0 * sigma).ceil() as i64;
        let g: Vec<f64> = (-r..=r)
            .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
            .collect();
        let s: f64 = g.iter().sum();
        let (h, w) = (gray.height() as i64, gray.width() as i64);
        let mut out = vec![0.0; (h * w) as usize];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for dy in -r..=r {
                    for dx in -r..=r {
                        let sy = (y + dy).clamp(0, h - 1) as usize;
                        let sx = (x + dx).clamp(0, w - 1) as usize;
                        acc += g[(dy + r) as usize] * g[(dx + r) as usize] / (s * s)
                            * gray.get(0, sy, sx) as f64;
                    }
                }
                out[(y * w + x) as usize] = acc;
            }
        }
        out
    }

    #[test]
    fn defaults() {
        let p = DogParams::default();
        assert_eq!(
            (p.sigma, p.k_ratio, p.t_gain, p.epsilon),
            (1.0, 1.6, 2.0, 0.01)
        );
        assert_eq!(p.scaled_to_height(1080).sigma, 2.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let img = ImageF32::filled(4, 4, 3, 1.0);
        let bad_sigma = DogParams {
            sigma: 0.0,
            ..Default::default()
        };
        let bad_k = DogParams {
            k_ratio: 1.0,
            ..Default::default()
        };
        assert!(extract_sketch(&img, &bad_sigma).is_err());
        assert!(extract_sketch(&img, &bad_k).is_err());
    }

    #[test]
    fn constant_image_has_no_lines() {
        let img = ImageF32::filled(12, 12, 3, 0.4);
        let resp = dog_response(&img, &DogParams::default()).unwrap();
        assert!(resp.data().iter().all(|&v| (v - 0.49).abs() < 1e-6));
        assert!(extract_sketch(&img, &DogParams::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn vertical_line_matches_dense_oracle() {
        let img = line_image(16, 16, 7);
        let p = DogParams::default();
        let sketch = extract_sketch(&img, &p).unwrap();
        let gray = imgproc::to_grayscale(&img).unwrap();
        let narrow = dense_blur(&gray, p.sigma as f64);
        let wide = dense_blur(&gray, (p.sigma * p.k_ratio) as f64);
        for y in 0..16 {
            for x in 0..16 {
                let i = y * 16 + x;
                let r = 0.5 + p.t_gain as f64 * (wide[i] - narrow[i]) - p.epsilon as f64;
                assert!((r - 0.5).abs() > 1e-4, "oracle too close to the threshold");
                assert_eq!(sketch.get(y, x), r > 0.5, "pixel ({y},{x})");
            }
            assert!(sketch.get(y, 7), "stroke pixel must be a line pixel");
        }
    }

    #[test]
    fn inverted_gain_excludes_the_stroke() {
        let img = line_image(16, 16, 7);
        let normal = extract_sketch(&img, &DogParams::default()).unwrap();
        let inverted = extract_sketch(
            &img,
            &DogParams {
                t_gain: -2.0,
                ..Default::default()
            },
        )
        .unwrap();
        for y in 0..16 {
            assert!(normal.get(y, 7));
            assert!(!inverted.get(y, 7));
        }
        // Responses fall on opposite sides of 0.5, so the sketches never overlap.
        assert!(normal
            .bits()
            .iter()
            .zip(inverted.bits())
            .all(|(a, b)| !(*a && *b)));
    }
}
