//! Softmax forward splatting.
//!
//! Source rows are split into fixed bands. Each band scatters into its own
//! accumulator that only spans the destination rows it can reach, and the
//! accumulators are merged in band order, so results are identical for any
//! worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imgproc::ImageF32;
use crate::warp::FlowField;

/// Minimum coverage for a splatted value to be defined.
pub const COVERAGE_EPS: f64 = 1e-7;

const BAND_ROWS: usize = 32;

/// Output of [`softmax_splat`].
#[derive(Clone, Debug, PartialEq)]
pub struct SplatResult {
    /// Softmax-normalized splatted channels, zero where coverage is below
    /// [`COVERAGE_EPS`].
    pub values: ImageF32,
    /// Sum of bilinear footprint weights landing on each pixel.
    pub coverage: ImageF32,
}

struct Accumulator {
    first_row: usize,
    rows: usize,
    // Per destination pixel: channels weighted numerators, softmax weight, coverage.
    slots: Vec<f64>,
}

/// Forward-warps `values` along `flow`, weighting each source pixel by
/// `exp(z)` where contributions overlap.
pub fn softmax_splat(values: &ImageF32, flow: &FlowField, z: &ImageF32) -> Result<SplatResult> {
    let (h, w, channels) = values.shape();
    flow.ensure_matches(h, w, "softmax_splat")?;
    z.ensure_same_size(values, "softmax_splat importance")?;
    z.ensure_channels(1, "softmax_splat importance")?;
    let z = z.plane(0);
    // Shifting every importance by the same constant leaves the normalized
    // values unchanged and keeps exp() in range.
    let z_max = z.iter().copied().fold(f32::NEG_INFINITY, f32::max) as f64;

    let stride = channels + 2;
    let (u, v) = (flow.u(), flow.v());

    let bands: Vec<Accumulator> = (0..h.div_ceil(BAND_ROWS))
        .into_par_iter()
        .map(|band| {
            let y_lo = band * BAND_ROWS;
            let y_hi = (y_lo + BAND_ROWS).min(h);
            let (mut top, mut bottom) = (f64::INFINITY, f64::NEG_INFINITY);
            for y in y_lo..y_hi {
                for x in 0..w {
                    let dy = y as f64 + v[y * w + x] as f64;
                    top = top.min(dy.floor());
                    bottom = bottom.max(dy.floor() + 1.0);
                }
            }
            let first_row = top.clamp(0.0, (h - 1) as f64) as usize;
            let last_row = bottom.clamp(0.0, (h - 1) as f64) as usize;
            let rows = last_row + 1 - first_row;
            let mut acc = Accumulator {
                first_row,
                rows,
                slots: vec![0.0; rows * w * stride],
            };
            for y in y_lo..y_hi {
                for x in 0..w {
                    let i = y * w + x;
                    let weight = (z[i] as f64 - z_max).exp();
                    let dx = x as f64 + u[i] as f64;
                    let dy = y as f64 + v[i] as f64;
                    let (fx, fy) = (dx.floor(), dy.floor());
                    let (ax, ay) = (dx - fx, dy - fy);
                    let corners = [
                        (fx, fy, (1.0 - ax) * (1.0 - ay)),
                        (fx + 1.0, fy, ax * (1.0 - ay)),
                        (fx, fy + 1.0, (1.0 - ax) * ay),
                        (fx + 1.0, fy + 1.0, ax * ay),
                    ];
                    for (cx, cy, b) in corners {
                        if b <= 0.0 || cx < 0.0 || cy < 0.0 || cx >= w as f64 || cy >= h as f64 {
                            continue;
                        }
                        let row = cy as usize - acc.first_row;
                        let slot = (row * w + cx as usize) * stride;
                        let s = &mut acc.slots[slot..slot + stride];
                        for (c, slot) in s[..channels].iter_mut().enumerate() {
                            *slot += weight * b * values.plane(c)[i] as f64;
                        }
                        s[channels] += weight * b;
                        s[channels + 1] += b;
                    }
                }
            }
            acc
        })
        .collect();

    let mut total = vec![0.0f64; h * w * stride];
    for acc in &bands {
        let start = acc.first_row * w * stride;
        for (t, s) in total[start..start + acc.rows * w * stride]
            .iter_mut()
            .zip(&acc.slots)
        {
            *t += s;
        }
    }

    let n = h * w;
    let mut out = vec![0.0f32; n * channels];
    let mut coverage = vec![0.0f32; n];
    for p in 0..n {
        let s = &total[p * stride..(p + 1) * stride];
        let (den, cov) = (s[channels], s[channels + 1]);
        coverage[p] = cov as f32;
        if cov > COVERAGE_EPS && den > 0.0 {
            for c in 0..channels {
                out[c * n + p] = (s[c] / den) as f32;
            }
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "softmax_splat produced non-finite values".into(),
        ));
    }
    Ok(SplatResult {
        values: ImageF32::from_raw(h, w, channels, out),
        coverage: ImageF32::from_raw(h, w, 1, coverage),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_flow_is_identity() {
        let img = ImageF32::from_fn(5, 6, 3, |c, y, x| ((c * 7 + y * 3 + x) % 11) as f32 / 10.0);
        let z = ImageF32::from_fn(5, 6, 1, |_, y, x| -((y + x) as f32) * 0.3);
        let r = softmax_splat(&img, &FlowField::zeros(5, 6), &z).unwrap();
        for (a, b) in r.values.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(r.coverage.data().iter().all(|&c| c == 1.0));
    }

    #[test]
    fn constant_under_shift() {
        let img = ImageF32::filled(4, 4, 1, 0.625);
        let z = ImageF32::zeros(4, 4, 1);
        let r = softmax_splat(&img, &FlowField::uniform(4, 4, 1.0, 0.0), &z).unwrap();
        for y in 0..4 {
            assert_eq!(r.coverage.get(0, y, 0), 0.0);
            assert_eq!(r.values.get(0, y, 0), 0.0);
            for x in 1..4 {
                assert_eq!(r.coverage.get(0, y, x), 1.0);
                assert_eq!(r.values.get(0, y, x), 0.625);
            }
        }
    }

    #[test]
    fn dimension_checks() {
        let img = ImageF32::zeros(4, 4, 1);
        let z = ImageF32::zeros(4, 4, 1);
        assert!(softmax_splat(&img, &FlowField::zeros(4, 5), &z).is_err());
        assert!(softmax_splat(&img, &FlowField::zeros(4, 4), &ImageF32::zeros(3, 4, 1)).is_err());
        assert!(softmax_splat(&img, &FlowField::zeros(4, 4), &ImageF32::zeros(4, 4, 2)).is_err());
    }

    #[test]
    fn large_importance_does_not_overflow() {
        let img = ImageF32::filled(3, 3, 1, 0.5);
        let z = ImageF32::filled(3, 3, 1, 2000.0);
        let r = softmax_splat(&img, &FlowField::uniform(3, 3, 0.3, 0.2), &z).unwrap();
        assert!(r.values.data().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn band_boundaries_do_not_matter() {
        // Flows that carry pixels across band boundaries in both directions.
        let (h, w) = (70, 9);
        let img = ImageF32::from_fn(h, w, 2, |c, y, x| ((c + y * 5 + x * 3) % 13) as f32 / 12.0);
        let flow = FlowField::from_fn(h, w, |y, x| {
            (
                ((x * 7 + y) % 5) as f32 * 0.37 - 0.8,
                ((y * 3 + x) % 9) as f32 * 4.1 - 16.0,
            )
        });
        let z = ImageF32::from_fn(h, w, 1, |_, y, x| -(((y + 2 * x) % 4) as f32));
        let r = softmax_splat(&img, &flow, &z).unwrap();

        // Single accumulator, source-major order.
        let mut num = vec![0.0f64; h * w * 2];
        let mut den = vec![0.0f64; h * w];
        let mut cov = vec![0.0f64; h * w];
        for y in 0..h {
            for x in 0..w {
                let (u, v) = flow.at(y, x);
                let wt = (z.get(0, y, x) as f64).exp();
                for ty in 0..h {
                    for tx in 0..w {
                        let bx = 1.0 - (tx as f64 - (x as f64 + u as f64)).abs();
                        let by = 1.0 - (ty as f64 - (y as f64 + v as f64)).abs();
                        if bx <= 0.0 || by <= 0.0 {
                            continue;
                        }
                        let b = bx * by;
                        for c in 0..2 {
                            num[c * h * w + ty * w + tx] += wt * b * img.get(c, y, x) as f64;
                        }
                        den[ty * w + tx] += wt * b;
                        cov[ty * w + tx] += b;
                    }
                }
            }
        }
        for p in 0..h * w {
            assert!((r.coverage.data()[p] as f64 - cov[p]).abs() < 1e-5);
            if cov[p] > COVERAGE_EPS {
                for c in 0..2 {
                    let want = num[c * h * w + p] / den[p];
                    assert!((r.values.data()[c * h * w + p] as f64 - want).abs() < 1e-5);
                }
            }
        }
    }
}
