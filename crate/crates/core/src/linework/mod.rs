//! Line extraction and line geometry: DoG sketches, the exact Euclidean
//! distance transform, its normalized form and the chamfer line distance.

mod dog;
pub mod edt;

pub use dog::{dog_response, extract_sketch, DogParams, REFERENCE_HEIGHT};
pub use edt::{edt, squared_edt, DistanceField, SquaredDistances, UNREACHABLE};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::{BinaryMask, ImageF32};

/// Binary line drawing, `true` on line pixels.
pub type BinarySketch = BinaryMask;

/// Default NEDT steepness: 15 pixels at a 540-pixel image height.
pub const DEFAULT_NEDT_TAU: f64 = 15.0 / 540.0;

/// Maps distances to `[0, 1]` with `1 - exp(-d / (tau * height))`.
pub fn normalize_distances(field: &DistanceField, tau: f64) -> Result<DistanceField> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "NEDT steepness must be positive, got {tau}"
        )));
    }
    let scale = tau * field.height() as f64;
    let values = field
        .values()
        .iter()
        .map(|&d| (1.0 - (-(d as f64) / scale).exp()) as f32)
        .collect();
    Ok(DistanceField::from_raw(
        field.height(),
        field.width(),
        values,
    ))
}

/// Normalized distance transform of the DoG sketch of `img`.
pub fn nedt(img: &ImageF32, tau: f64, params: &DogParams) -> Result<DistanceField> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "NEDT steepness must be positive, got {tau}"
        )));
    }
    let sketch = extract_sketch(img, params)?;
    normalize_distances(&edt(&sketch), tau)
}

/// Which length normalizes chamfer distances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Diameter {
    /// `sqrt(H^2 + W^2)`
    #[default]
    Diagonal,
    /// `max(H, W)`
    MaxSide,
}

impl Diameter {
    pub fn length(self, height: usize, width: usize) -> f64 {
        match self {
            Diameter::Diagonal => ((height * height + width * width) as f64).sqrt(),
            Diameter::MaxSide => height.max(width) as f64,
        }
    }
}

/// Chamfer line distance normalized by image area and diagonal.
pub fn chamfer(x0: &BinarySketch, x1: &BinarySketch) -> Result<f64> {
    chamfer_with(x0, x1, Diameter::Diagonal)
}

pub fn chamfer_with(x0: &BinarySketch, x1: &BinarySketch, diameter: Diameter) -> Result<f64> {
    let (h, w) = (x0.height(), x0.width());
    if !x1.same_size_as(h, w) {
        return Err(Error::InvalidInput(format!(
            "chamfer: size mismatch {h}x{w} vs {}x{}",
            x1.height(),
            x1.width()
        )));
    }
    if x0.is_empty() {
        return Err(Error::EmptySketch("first sketch has no line pixels"));
    }
    if x1.is_empty() {
        return Err(Error::EmptySketch("second sketch has no line pixels"));
    }
    let (dt0, dt1) = rayon::join(|| squared_edt(x0), || squared_edt(x1));
    Ok(chamfer_from_fields(x0, x1, &dt0, &dt1, diameter))
}

fn chamfer_from_fields(
    x0: &BinarySketch,
    x1: &BinarySketch,
    dt0: &SquaredDistances,
    dt1: &SquaredDistances,
    diameter: Diameter,
) -> f64 {
    let (h, w) = (x0.height(), x0.width());
    let forward = masked_distance_sum(x0, dt1);
    let backward = masked_distance_sum(x1, dt0);
    (forward + backward) / (2.0 * (h * w) as f64 * diameter.length(h, w))
}

/// Everything line-based that is computed for one image pair.
#[derive(Clone, Debug, PartialEq)]
pub struct LineMetrics {
    pub sketches: [BinarySketch; 2],
    pub nedt: [DistanceField; 2],
    pub chamfer: f64,
}

/// Sketches, normalized distance fields and chamfer distance of a pair,
/// computing each distance transform once.
pub fn line_metrics(
    a: &ImageF32,
    b: &ImageF32,
    tau: f64,
    params: &DogParams,
) -> Result<LineMetrics> {
    a.ensure_same_size(b, "line_metrics")?;
    let (sa, sb) = rayon::join(|| extract_sketch(a, params), || extract_sketch(b, params));
    let (sa, sb) = (sa?, sb?);
    if sa.is_empty() {
        return Err(Error::EmptySketch("first sketch has no line pixels"));
    }
    if sb.is_empty() {
        return Err(Error::EmptySketch("second sketch has no line pixels"));
    }
    let (dta, dtb) = rayon::join(|| squared_edt(&sa), || squared_edt(&sb));
    let chamfer = chamfer_from_fields(&sa, &sb, &dta, &dtb, Diameter::Diagonal);
    let nedt = [
        normalize_distances(&DistanceField::from(&dta), tau)?,
        normalize_distances(&DistanceField::from(&dtb), tau)?,
    ];
    Ok(LineMetrics {
        sketches: [sa, sb],
        nedt,
        chamfer,
    })
}

// Sum of distances under the mask. Row sums are combined in row order so the
// total does not depend on scheduling.
fn masked_distance_sum(mask: &BinarySketch, dist: &SquaredDistances) -> f64 {
    let w = mask.width();
    let rows: Vec<f64> = mask
        .bits()
        .par_chunks(w)
        .zip(dist.values().par_chunks(w))
        .map(|(bits, d)| {
            bits.iter()
                .zip(d)
                .filter(|(b, _)| **b)
                .map(|(_, &sq)| (sq as f64).sqrt())
                .sum::<f64>()
        })
        .collect();
    rows.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_metrics_agree_with_separate_calls() {
        let a = ImageF32::from_fn(
            40,
            48,
            3,
            |_, y, x| if x == 12 || y == 30 { 0.0 } else { 1.0 },
        );
        let b = ImageF32::from_fn(
            40,
            48,
            3,
            |_, y, x| if x == 17 || y == 9 { 0.0 } else { 1.0 },
        );
        let p = DogParams::default();
        let m = line_metrics(&a, &b, DEFAULT_NEDT_TAU, &p).unwrap();
        let sa = extract_sketch(&a, &p).unwrap();
        let sb = extract_sketch(&b, &p).unwrap();
        assert_eq!(m.chamfer, chamfer(&sa, &sb).unwrap());
        assert_eq!(m.nedt[1], nedt(&b, DEFAULT_NEDT_TAU, &p).unwrap());
        assert!(line_metrics(&a, &ImageF32::filled(40, 48, 3, 1.0), DEFAULT_NEDT_TAU, &p).is_err());
    }

    #[test]
    fn nedt_examples() {
        let mut s = BinaryMask::filled(540, 4, false);
        s.set(0, 0, true);
        let d = edt(&s);
        let n = normalize_distances(&d, DEFAULT_NEDT_TAU).unwrap();
        assert_eq!(n.get(0, 0), 0.0);
        // tau * d = 15 pixels for a 540-row image.
        let at = n.get(15, 0) as f64;
        assert!((at - (1.0 - (-1.0f64).exp())).abs() < 1e-6);
        assert!(n.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn nedt_blank_frame_is_all_ones() {
        let img = ImageF32::filled(10, 12, 3, 0.8);
        let n = nedt(&img, DEFAULT_NEDT_TAU, &DogParams::default()).unwrap();
        assert!(n.values().iter().all(|&v| v == 1.0));
        assert!(nedt(&img, 0.0, &DogParams::default()).is_err());
        assert!(nedt(&img, -1.0, &DogParams::default()).is_err());
    }

    #[test]
    fn chamfer_single_pixel_case() {
        let a = BinaryMask::from_fn(8, 8, |y, x| (y, x) == (0, 0));
        let b = BinaryMask::from_fn(8, 8, |y, x| (y, x) == (4, 0));
        let want = 8.0 / (2.0 * 64.0 * 128f64.sqrt());
        assert!((chamfer(&a, &b).unwrap() - want).abs() < 1e-12);
        assert!((want - 5.524e-3).abs() < 1e-6);
        let max_side = chamfer_with(&a, &b, Diameter::MaxSide).unwrap();
        assert!((max_side - 8.0 / (2.0 * 64.0 * 8.0)).abs() < 1e-12);
    }

    #[test]
    fn chamfer_errors() {
        let a = BinaryMask::filled(4, 4, true);
        let e = BinaryMask::filled(4, 4, false);
        assert!(matches!(chamfer(&a, &e), Err(Error::EmptySketch(_))));
        assert!(matches!(chamfer(&e, &a), Err(Error::EmptySketch(_))));
        let other = BinaryMask::filled(4, 5, true);
        assert!(matches!(chamfer(&a, &other), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn chamfer_identity_is_zero() {
        let a = BinaryMask::from_fn(9, 11, |y, x| (x + 2 * y) % 5 == 0);
        assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
    }
}
