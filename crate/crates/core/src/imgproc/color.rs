use crate::error::Result;
use crate::imgproc::ImageF32;

/// Luma weights applied to (R, G, B).
pub type GrayWeights = [f32; 3];

/// Rec. 601 luma coefficients.
pub const REC601: GrayWeights = [0.299, 0.587, 0.114];

/// Rec. 601 luma of an sRGB image.
pub fn to_grayscale(img: &ImageF32) -> Result<ImageF32> {
    to_grayscale_with(img, REC601)
}

pub fn to_grayscale_with(img: &ImageF32, weights: GrayWeights) -> Result<ImageF32> {
    img.ensure_channels(3, "to_grayscale")?;
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    let data = r
        .iter()
        .zip(g)
        .zip(b)
        .map(|((&r, &g), &b)| weights[0] * r + weights[1] * g + weights[2] * b)
        .collect();
    Ok(ImageF32::from_raw(img.height(), img.width(), 1, data))
}

// sRGB primaries to CIE XYZ under D65.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

#[inline]
fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

#[inline]
fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// Converts one sRGB triple in `[0, 1]` to CIE L*a*b*.
pub(crate) fn srgb_pixel_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let lin = rgb.map(srgb_to_linear);
    let mut xyz = [0.0; 3];
    // White point is the image of (1, 1, 1) so pure white lands on a* = b* = 0.
    let mut white = [0.0; 3];
    for (row, (out, w)) in RGB_TO_XYZ.iter().zip(xyz.iter_mut().zip(white.iter_mut())) {
        *out = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
        *w = row[0] + row[1] + row[2];
    }
    let fx = lab_f(xyz[0] / white[0]);
    let fy = lab_f(xyz[1] / white[1]);
    let fz = lab_f(xyz[2] / white[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// sRGB (gamma encoded, `[0, 1]`) to CIE L*a*b* with a D65 white point.
pub fn rgb_to_lab(img: &ImageF32) -> Result<ImageF32> {
    img.ensure_channels(3, "rgb_to_lab")?;
    let n = img.pixel_count();
    let mut data = vec![0.0f32; 3 * n];
    let (r, g, b) = (img.plane(0), img.plane(1), img.plane(2));
    for i in 0..n {
        let lab = srgb_pixel_to_lab([r[i] as f64, g[i] as f64, b[i] as f64]);
        data[i] = lab[0] as f32;
        data[n + i] = lab[1] as f32;
        data[2 * n + i] = lab[2] as f32;
    }
    Ok(ImageF32::from_raw(img.height(), img.width(), 3, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rgb(r: f32, g: f32, b: f32) -> ImageF32 {
        ImageF32::from_fn(2, 2, 3, |c, _, _| [r, g, b][c])
    }

    #[test]
    fn grayscale_examples() {
        let white = to_grayscale(&rgb(1.0, 1.0, 1.0)).unwrap();
        assert!(white.data().iter().all(|&v| (v - 1.0).abs() < 1e-6));
        let gray = to_grayscale(&rgb(0.3, 0.3, 0.3)).unwrap();
        assert!(gray.data().iter().all(|&v| (v - 0.3).abs() < 1e-6));
        let red = to_grayscale(&rgb(1.0, 0.0, 0.0)).unwrap();
        assert!(red.data().iter().all(|&v| v == 0.299));
        assert!(to_grayscale(&ImageF32::zeros(2, 2, 1)).is_err());
    }

    // Independent evaluation of the CIE formulas using the textbook D65 white
    // (Xn, Yn, Zn) = (0.95047, 1.0, 1.08883).
    fn reference_lab(c: f64) -> [f64; 3] {
        let lin = if c <= 0.04045 {
            c / 12.92
        } else {
            ((c + 0.055) / 1.055).powf(2.4)
        };
        let x = (0.4124564 + 0.3575761 + 0.1804375) * lin / 0.95047;
        let y = (0.2126729 + 0.7151522 + 0.0721750) * lin;
        let z = (0.0193339 + 0.1191920 + 0.9503041) * lin / 1.08883;
        let f = |t: f64| {
            if t > 216.0 / 24389.0 {
                t.cbrt()
            } else {
                (24389.0 / 27.0 * t + 16.0) / 116.0
            }
        };
        [
            116.0 * f(y) - 16.0,
            500.0 * (f(x) - f(y)),
            200.0 * (f(y) - f(z)),
        ]
    }

    #[test]
    fn lab_examples() {
        let black = rgb_to_lab(&rgb(0.0, 0.0, 0.0)).unwrap();
        assert!(black.data().iter().all(|&v| v.abs() < 1e-6));

        let white = rgb_to_lab(&rgb(1.0, 1.0, 1.0)).unwrap();
        assert!((white.get(0, 0, 0) - 100.0).abs() < 1e-3);
        assert!(white.get(1, 0, 0).abs() < 1e-3);
        assert!(white.get(2, 0, 0).abs() < 1e-3);

        let mid = rgb_to_lab(&rgb(0.5, 0.5, 0.5)).unwrap();
        let want = reference_lab(0.5);
        assert!((want[0] - 53.389).abs() < 1e-2);
        for (c, w) in want.iter().enumerate() {
            assert!((mid.get(c, 1, 1) as f64 - w).abs() < 1e-2, "channel {c}");
        }
    }

    #[test]
    fn lab_gray_ramp_matches_reference() {
        for i in 0..=20 {
            let c = i as f64 / 20.0;
            let got = srgb_pixel_to_lab([c, c, c]);
            let want = reference_lab(c);
            for k in 0..3 {
                assert!((got[k] - want[k]).abs() < 1e-2, "c={c} k={k}");
            }
        }
    }

    #[test]
    fn lab_distance_zero_on_identical_inputs() {
        let img = ImageF32::from_fn(3, 3, 3, |c, y, x| ((c + y * 3 + x) % 7) as f32 / 7.0);
        let a = rgb_to_lab(&img).unwrap();
        let b = rgb_to_lab(&img.clone()).unwrap();
        assert_eq!(a, b);
    }
}
