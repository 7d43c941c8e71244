//! Automatic training-triplet mining.
//!
//! A triplet `(prev, mid, next)` is rated by how far `mid` sits from the
//! linear halfway point between its neighbours, measured from the two flows
//! leaving `mid`. Pans and duplicate frames are filtered out, and one
//! surviving triplet is drawn per cut.

mod dedup;
mod naive;
mod pan;
mod pipeline;

pub use dedup::{dedup_features, fit_dedup, DedupFeatures, DedupModel, DedupSample};
pub use naive::{naive_ssim_filter, NaiveSsimFilter, PairPolicy};
pub use pan::{detect_pan, PanParams};
pub use pipeline::{mine, Cut, FlowSource, FrameSource, MineParams, RejectReason, TripletRecord};

use crate::error::{Error, Result};
use crate::imgproc::BinaryMask;
use crate::warp::FlowField;

/// Default minimum flow norm for a pixel to enter the restricted set.
pub const DEFAULT_MIN_NORM: f64 = 2.0;

/// Default acceptance cutoff on the linear discrepancy.
pub const DEFAULT_RRLD_THRESHOLD: f64 = 0.3;

/// Flows leaving the middle frame of a triplet.
#[derive(Clone, Debug, PartialEq)]
pub struct TripletFlows {
    /// Middle frame to the earlier frame.
    pub flow_to_prev: FlowField,
    /// Middle frame to the later frame.
    pub flow_to_next: FlowField,
}

impl TripletFlows {
    pub fn new(flow_to_prev: FlowField, flow_to_next: FlowField) -> Result<Self> {
        flow_to_next.ensure_matches(
            flow_to_prev.height(),
            flow_to_prev.width(),
            "triplet flows",
        )?;
        Ok(Self {
            flow_to_prev,
            flow_to_next,
        })
    }

    pub fn height(&self) -> usize {
        self.flow_to_prev.height()
    }

    pub fn width(&self) -> usize {
        self.flow_to_prev.width()
    }

    /// Same flows with the roles of the two end frames exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            flow_to_prev: self.flow_to_next.clone(),
            flow_to_next: self.flow_to_prev.clone(),
        }
    }
}

/// Pixels where both flows are longer than `min_norm` and both land inside
/// the frame.
pub fn restricted_set(flows: &TripletFlows, min_norm: f64) -> BinaryMask {
    let (h, w) = (flows.height(), flows.width());
    let inside = |y: usize, x: usize, (u, v): (f32, f32)| {
        let (dx, dy) = (x as f64 + u as f64, y as f64 + v as f64);
        (u as f64).hypot(v as f64) > min_norm
            && dx >= 0.0
            && dx < w as f64
            && dy >= 0.0
            && dy < h as f64
    };
    BinaryMask::from_fn(h, w, |y, x| {
        inside(y, x, flows.flow_to_prev.at(y, x)) && inside(y, x, flows.flow_to_next.at(y, x))
    })
}

/// Mean over `omega` of `(|p + n| / 2) / |p - n|`.
///
/// Pixels where both flows coincide have a zero denominator and are skipped;
/// if nothing is left the triplet cannot be rated.
pub fn rrld_over(flows: &TripletFlows, omega: &BinaryMask) -> Result<f64> {
    let (pu, pv) = (flows.flow_to_prev.u(), flows.flow_to_prev.v());
    let (nu, nv) = (flows.flow_to_next.u(), flows.flow_to_next.v());
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, _) in omega.bits().iter().enumerate().filter(|(_, b)| **b) {
        let (pu, pv, nu, nv) = (pu[i] as f64, pv[i] as f64, nu[i] as f64, nv[i] as f64);
        let den = (pu - nu).hypot(pv - nv);
        if den == 0.0 {
            continue;
        }
        sum += (pu + nu).hypot(pv + nv) / 2.0 / den;
        count += 1;
    }
    if count == 0 {
        return Err(Error::NoValidPixels);
    }
    Ok(sum / count as f64)
}

/// Restricted relative linear discrepancy of a triplet.
pub fn rrld(flows: &TripletFlows, min_norm: f64) -> Result<f64> {
    rrld_over(flows, &restricted_set(flows, min_norm))
}
