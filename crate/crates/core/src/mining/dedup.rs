use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::imgproc::{rgb_to_lab, ImageF32};

/// Mean and maximum per-pixel LAB distance between two frames.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DedupFeatures {
    pub mean: f64,
    pub max: f64,
}

pub fn dedup_features(a: &ImageF32, b: &ImageF32) -> Result<DedupFeatures> {
    a.ensure_same_size(b, "dedup_features")?;
    let (la, lb) = (rgb_to_lab(a)?, rgb_to_lab(b)?);
    let n = a.pixel_count();
    let (mut sum, mut max) = (0.0f64, 0.0f64);
    for i in 0..n {
        let d2: f64 = (0..3)
            .map(|c| {
                let d = la.plane(c)[i] as f64 - lb.plane(c)[i] as f64;
                d * d
            })
            .sum();
        let d = d2.sqrt();
        sum += d;
        max = max.max(d);
    }
    Ok(DedupFeatures {
        mean: sum / n as f64,
        max,
    })
}

/// Linear duplicate-frame scorer over [`DedupFeatures`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DedupModel {
    pub bias: f64,
    pub w_mean: f64,
    pub w_max: f64,
    pub threshold: f64,
}

impl DedupModel {
    pub fn score(&self, f: DedupFeatures) -> f64 {
        self.bias + self.w_mean * f.mean + self.w_max * f.max
    }

    pub fn is_duplicate(&self, f: DedupFeatures) -> bool {
        self.score(f) > self.threshold
    }
}

/// Four whitespace-separated numbers: bias, mean weight, max weight, threshold.
impl fmt::Display for DedupModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} {} {} {}",
            self.bias, self.w_mean, self.w_max, self.threshold
        )
    }
}

impl FromStr for DedupModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let nums: Vec<f64> = s
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| format!("bad number {t:?}: {e}"))
            })
            .collect::<std::result::Result<_, _>>()?;
        match nums[..] {
            [bias, w_mean, w_max, threshold] if nums.iter().all(|v| v.is_finite()) => Ok(Self {
                bias,
                w_mean,
                w_max,
                threshold,
            }),
            _ => Err(format!("expected 4 finite numbers, found {}", nums.len())),
        }
    }
}

/// One labelled training pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DedupSample {
    pub features: DedupFeatures,
    pub is_duplicate: bool,
}

/// Least-squares fit of the 0/1 label on `(1, mean, max)`; the decision
/// threshold is 0.5.
pub fn fit_dedup(samples: &[DedupSample]) -> Result<DedupModel> {
    if samples.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    let positives = samples.iter().filter(|s| s.is_duplicate).count();
    if positives == 0 || positives == samples.len() {
        return Err(Error::Fit(
            "both duplicate and distinct samples are required".into(),
        ));
    }
    let n = samples.len();
    let x = DMatrix::from_fn(n, 3, |r, c| match c {
        0 => 1.0,
        1 => samples[r].features.mean,
        _ => samples[r].features.max,
    });
    let y = DVector::from_iterator(n, samples.iter().map(|s| s.is_duplicate as u8 as f64));

    let svd = x.svd(true, true);
    let largest = svd.singular_values.max();
    let tol = largest * n.max(3) as f64 * f64::EPSILON;
    if svd.rank(tol) < 3 {
        return Err(Error::Fit("design matrix is rank deficient".into()));
    }
    let w = svd.solve(&y, tol).map_err(|e| Error::Fit(e.to_string()))?;
    Ok(DedupModel {
        bias: w[0],
        w_mean: w[1],
        w_max: w[2],
        threshold: 0.5,
    })
}
