//! Flow-driven warping: backward sampling, the LAB consistency importance
//! metric, softmax forward splatting, occlusion masks and occlusion-mask
//! infilling, plus a network-free interpolator built from them.

mod flow;
mod splat;

pub use flow::FlowField;
pub use splat::{softmax_splat, SplatResult, COVERAGE_EPS};

use crate::error::{Error, Result};
use crate::imgproc::{self, morph_open, BinaryMask, ImageF32};

/// Side length of the square used to open occlusion masks.
pub const DEFAULT_OPEN_KERNEL: usize = 5;

/// Coverage above which a target pixel counts as reached by a warp.
pub const COVERAGE_THRESHOLD: f32 = 0.5;

/// Scale applied to the LAB residual norm in [`z_metric`].
pub const Z_SCALE: f32 = -0.1;

/// Bilinear sample of `img` at `x + flow(x)`, coordinates clamped to the frame.
pub fn backward_warp(img: &ImageF32, flow: &FlowField) -> Result<ImageF32> {
    let (h, w, channels) = img.shape();
    flow.ensure_matches(h, w, "backward_warp")?;
    let mut out = vec![0.0f32; h * w * channels];
    let n = h * w;
    for y in 0..h {
        for x in 0..w {
            let (u, v) = flow.at(y, x);
            let sx = (x as f32 + u).clamp(0.0, (w - 1) as f32);
            let sy = (y as f32 + v).clamp(0.0, (h - 1) as f32);
            let (x0, y0) = (sx.floor() as usize, sy.floor() as usize);
            let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
            let (ax, ay) = (sx - x0 as f32, sy - y0 as f32);
            for c in 0..channels {
                let p = img.plane(c);
                let top = (1.0 - ax) * p[y0 * w + x0] + ax * p[y0 * w + x1];
                let bottom = (1.0 - ax) * p[y1 * w + x0] + ax * p[y1 * w + x1];
                out[c * n + y * w + x] = (1.0 - ay) * top + ay * bottom;
            }
        }
    }
    Ok(ImageF32::from_raw(h, w, channels, out))
}

/// Negative scaled LAB residual between `src` and `other` sampled along
/// `flow_src_to_other`. Zero means perfectly consistent, always `<= 0`.
pub fn z_metric(
    src: &ImageF32,
    other: &ImageF32,
    flow_src_to_other: &FlowField,
) -> Result<ImageF32> {
    src.ensure_same_size(other, "z_metric")?;
    let lab_src = imgproc::rgb_to_lab(src)?;
    let lab_other = imgproc::rgb_to_lab(other)?;
    let sampled = backward_warp(&lab_other, flow_src_to_other)?;
    let n = src.pixel_count();
    let data = (0..n)
        .map(|i| {
            let d2: f32 = (0..3)
                .map(|c| {
                    let d = lab_src.plane(c)[i] - sampled.plane(c)[i];
                    d * d
                })
                .sum();
            Z_SCALE * d2.sqrt()
        })
        .collect();
    Ok(ImageF32::from_raw(src.height(), src.width(), 1, data))
}

/// Pixels reached by splatting an image of ones, cleaned by opening.
pub fn occlusion_mask(flow: &FlowField, z: &ImageF32) -> Result<BinaryMask> {
    occlusion_mask_with(flow, z, DEFAULT_OPEN_KERNEL)
}

pub fn occlusion_mask_with(
    flow: &FlowField,
    z: &ImageF32,
    open_kernel: usize,
) -> Result<BinaryMask> {
    let ones = ImageF32::filled(flow.height(), flow.width(), 1, 1.0);
    let splat = softmax_splat(&ones, flow, z)?;
    coverage_mask(&splat.coverage, open_kernel)
}

fn coverage_mask(coverage: &ImageF32, open_kernel: usize) -> Result<BinaryMask> {
    let raw = BinaryMask::from_raw(
        coverage.height(),
        coverage.width(),
        coverage
            .data()
            .iter()
            .map(|&c| c > COVERAGE_THRESHOLD)
            .collect(),
    );
    morph_open(&raw, open_kernel)
}

/// Result of [`infilled_warp`]: the combined warp and the masks behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct Infilled {
    pub image: ImageF32,
    /// Opened coverage mask of the warp from the first input.
    pub mask_0t: BinaryMask,
    /// Opened coverage mask of the warp from the second input.
    pub mask_1t: BinaryMask,
}

impl Infilled {
    /// Pixels neither warp covers; infilling cannot repair these.
    pub fn holes(&self) -> BinaryMask {
        BinaryMask::from_raw(
            self.mask_0t.height(),
            self.mask_0t.width(),
            self.mask_0t
                .bits()
                .iter()
                .zip(self.mask_1t.bits())
                .map(|(a, b)| !a && !b)
                .collect(),
        )
    }
}

/// Inputs to [`infilled_warp`]: two feature stacks, their flows to the target
/// time, and their splatting importance.
#[derive(Clone, Copy, Debug)]
pub struct WarpInputs<'a> {
    pub f0: &'a ImageF32,
    pub f1: &'a ImageF32,
    pub flow_0t: &'a FlowField,
    pub flow_1t: &'a FlowField,
    pub z0: &'a ImageF32,
    pub z1: &'a ImageF32,
}

/// Averages both forward warps, filling each warp's occluded pixels with the
/// other warp:
///
/// `F = ½(M0·W0 + (1−M0)·W1) + ½(M1·W1 + (1−M1)·W0)`
pub fn infilled_warp(inputs: WarpInputs<'_>) -> Result<Infilled> {
    infilled_warp_with(inputs, DEFAULT_OPEN_KERNEL)
}

pub fn infilled_warp_with(inputs: WarpInputs<'_>, open_kernel: usize) -> Result<Infilled> {
    let WarpInputs {
        f0,
        f1,
        flow_0t,
        flow_1t,
        z0,
        z1,
    } = inputs;
    f0.ensure_same_size(f1, "infilled_warp")?;
    if f0.channels() != f1.channels() {
        return Err(Error::InvalidInput(format!(
            "infilled_warp: channel mismatch {} vs {}",
            f0.channels(),
            f1.channels()
        )));
    }
    let (s0, s1) = rayon::join(
        || softmax_splat(f0, flow_0t, z0),
        || softmax_splat(f1, flow_1t, z1),
    );
    let (s0, s1) = (s0?, s1?);
    let m0 = coverage_mask(&s0.coverage, open_kernel)?;
    let m1 = coverage_mask(&s1.coverage, open_kernel)?;
    Ok(Infilled {
        image: combine(&s0.values, &s1.values, &m0, &m1),
        mask_0t: m0,
        mask_1t: m1,
    })
}

fn combine(w0: &ImageF32, w1: &ImageF32, m0: &BinaryMask, m1: &BinaryMask) -> ImageF32 {
    let n = w0.pixel_count();
    let mut out = vec![0.0f32; w0.data().len()];
    for c in 0..w0.channels() {
        let (a, b) = (w0.plane(c), w1.plane(c));
        for i in 0..n {
            let from0 = if m0.bits()[i] { a[i] } else { b[i] };
            let from1 = if m1.bits()[i] { b[i] } else { a[i] };
            out[c * n + i] = 0.5 * from0 + 0.5 * from1;
        }
    }
    ImageF32::from_raw(w0.height(), w0.width(), w0.channels(), out)
}

/// Interpolates RGB frames at time `t` by applying occlusion-mask infilling
/// directly to the inputs. Output is clamped to `[0, 1]`.
pub fn halfway_guess(
    i0: &ImageF32,
    i1: &ImageF32,
    flow_01: &FlowField,
    flow_10: &FlowField,
    t: f32,
) -> Result<Infilled> {
    halfway_guess_with(i0, i1, flow_01, flow_10, t, DEFAULT_OPEN_KERNEL)
}

pub fn halfway_guess_with(
    i0: &ImageF32,
    i1: &ImageF32,
    flow_01: &FlowField,
    flow_10: &FlowField,
    t: f32,
    open_kernel: usize,
) -> Result<Infilled> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "interpolation time must lie in [0, 1], got {t}"
        )));
    }
    i0.ensure_same_size(i1, "halfway_guess")?;
    let (z0, z1) = rayon::join(|| z_metric(i0, i1, flow_01), || z_metric(i1, i0, flow_10));
    let (z0, z1) = (z0?, z1?);
    let flow_0t = flow_01.scaled(t);
    let flow_1t = flow_10.scaled(1.0 - t);
    let mut out = infilled_warp_with(
        WarpInputs {
            f0: i0,
            f1: i1,
            flow_0t: &flow_0t,
            flow_1t: &flow_1t,
            z0: &z0,
            z1: &z1,
        },
        open_kernel,
    )?;
    out.image = out.image.map(|v| v.clamp(0.0, 1.0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(h: usize, w: usize) -> ImageF32 {
        ImageF32::from_fn(h, w, 1, |_, _, x| x as f32 * 0.1)
    }

    #[test]
    fn backward_zero_flow_is_exact() {
        let img = ImageF32::from_fn(5, 7, 3, |c, y, x| {
            ((c * 31 + y * 7 + x * 3) % 17) as f32 / 16.0
        });
        let out = backward_warp(&img, &FlowField::zeros(5, 7)).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn backward_shift_on_ramp() {
        let img = ramp(4, 6);
        let out = backward_warp(&img, &FlowField::uniform(4, 6, 1.0, 0.0)).unwrap();
        for y in 0..4 {
            for x in 0..6 {
                let want = (x + 1).min(5) as f32 * 0.1;
                assert!((out.get(0, y, x) - want).abs() < 1e-6);
            }
        }
        let half = backward_warp(&img, &FlowField::uniform(4, 6, 0.5, 0.0)).unwrap();
        assert!((half.get(0, 2, 2) - 0.25).abs() < 1e-6);
    }

    #[test]
    fn backward_clamps_far_samples() {
        let img = ImageF32::from_fn(3, 3, 1, |_, y, x| (y * 3 + x) as f32);
        let out = backward_warp(&img, &FlowField::uniform(3, 3, 100.0, -100.0)).unwrap();
        assert!(out.data().iter().all(|&v| v == 2.0));
        assert!(backward_warp(&img, &FlowField::zeros(3, 4)).is_err());
    }

    #[test]
    fn z_metric_cases() {
        let img = ImageF32::from_fn(4, 4, 3, |c, y, x| ((c + y + x) % 3) as f32 / 2.0);
        let z = z_metric(&img, &img, &FlowField::zeros(4, 4)).unwrap();
        assert!(z.data().iter().all(|&v| v == 0.0));

        // Black vs. a gray whose L* is 10 gives Z = -1.
        let black = ImageF32::zeros(2, 2, 3);
        let lightness = |c: f32| {
            imgproc::rgb_to_lab(&ImageF32::filled(1, 1, 3, c))
                .unwrap()
                .get(0, 0, 0)
        };
        let (mut lo, mut hi) = (0.0f32, 1.0f32);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if lightness(mid) < 10.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let gray = ImageF32::filled(2, 2, 3, lo);
        let z = z_metric(&black, &gray, &FlowField::zeros(2, 2)).unwrap();
        assert!((z.get(0, 1, 1) + 1.0).abs() < 1e-4);
    }

    #[test]
    fn occlusion_mask_cases() {
        let z = ImageF32::zeros(16, 16, 1);
        assert!(occlusion_mask(&FlowField::zeros(16, 16), &z)
            .unwrap()
            .bits()
            .iter()
            .all(|&b| b));
        assert!(occlusion_mask(&FlowField::uniform(16, 16, 40.0, 0.0), &z)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn static_scene_reproduces_input() {
        let img = ImageF32::from_fn(9, 10, 3, |c, y, x| ((c * 5 + y * 2 + x) % 9) as f32 / 8.0);
        let zero = FlowField::zeros(9, 10);
        let out = halfway_guess(&img, &img, &zero, &zero, 0.5).unwrap();
        for (a, b) in out.image.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(out.holes().is_empty());
        assert!(halfway_guess(&img, &img, &zero, &zero, 1.5).is_err());
        assert!(halfway_guess(&img, &img, &zero, &zero, -0.1).is_err());
    }

    #[test]
    fn constants_average() {
        let a = ImageF32::filled(6, 6, 3, 0.2);
        let b = ImageF32::filled(6, 6, 3, 0.6);
        let zero = FlowField::zeros(6, 6);
        let z = ImageF32::zeros(6, 6, 1);
        let out = infilled_warp(WarpInputs {
            f0: &a,
            f1: &b,
            flow_0t: &zero,
            flow_1t: &zero,
            z0: &z,
            z1: &z,
        })
        .unwrap();
        assert!(out.image.data().iter().all(|&v| (v - 0.4).abs() < 1e-6));
        for t in [0.0, 1.0] {
            let g = halfway_guess(&a, &b, &zero, &zero, t).unwrap();
            assert!(g.image.data().iter().all(|&v| (v - 0.4).abs() < 1e-6));
        }
    }
}
