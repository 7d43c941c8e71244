//! Prediction-vs-ground-truth scoring and table-style reports.

mod metrics;
mod report;

pub use metrics::{chamfer_eval, psnr, ssim, SSIM_SIGMA, SSIM_WINDOW};
pub use report::{aggregate, apply_tags, AggregateRow, MetricReport, MetricRow, CD_DISPLAY_SCALE};

use crate::error::Error;
use crate::imgproc::ImageF32;
use crate::linework::DogParams;

/// Scores one sample. An empty sketch leaves `cd` unset and records a flag
/// instead of failing; other errors propagate.
pub fn score_pair(
    sample_id: &str,
    pred: &ImageF32,
    gt: &ImageF32,
    params: &DogParams,
) -> crate::Result<MetricRow> {
    let (cd, flag) = match chamfer_eval(pred, gt, params) {
        Ok(cd) => (Some(cd), None),
        Err(Error::EmptySketch(why)) => (None, Some(format!("empty-sketch: {why}"))),
        Err(e) => return Err(e),
    };
    Ok(MetricRow {
        sample_id: sample_id.to_string(),
        cd,
        psnr: psnr(pred, gt)?,
        ssim: ssim(pred, gt)?,
        tags: Vec::new(),
        flag,
    })
}
