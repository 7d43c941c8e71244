use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::ImageF32;
use crate::mining::{
    dedup_features, detect_pan, restricted_set, rrld_over, DedupModel, PanParams, TripletFlows,
    DEFAULT_MIN_NORM, DEFAULT_RRLD_THRESHOLD,
};
use crate::warp::FlowField;

/// An indexed frame sequence.
pub trait FrameSource: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Label written to the manifest for frame `index`.
    fn name(&self, index: usize) -> String;

    /// RGB frame with values in `[0, 1]`.
    fn load(&self, index: usize) -> Result<ImageF32>;
}

/// Precomputed optical flow between frames of a [`FrameSource`].
pub trait FlowSource: Sync {
    /// Flow from frame `from` to frame `to`, or `None` if it was never computed.
    fn flow(&self, from: usize, to: usize) -> Result<Option<FlowField>>;
}

/// A shot, as an inclusive range of frame indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub id: u64,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MineParams {
    pub rrld_threshold: f64,
    pub min_norm: f64,
    /// Pan thresholds at the 540-row reference height.
    pub pan: PanParams,
    pub seed: u64,
    /// Without a model no frame is treated as a duplicate.
    pub dedup: Option<DedupModel>,
}

impl Default for MineParams {
    fn default() -> Self {
        Self {
            rrld_threshold: DEFAULT_RRLD_THRESHOLD,
            min_norm: DEFAULT_MIN_NORM,
            pan: PanParams::default(),
            seed: 0,
            dedup: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    Duplicate,
    MissingFlow,
    NoValidPixels,
    Pan,
    Rrld,
    /// Passed every filter but another triplet of the cut was drawn.
    NotSelected,
}

/// One manifest line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripletRecord {
    pub prev: String,
    pub mid: String,
    pub next: String,
    pub rrld: Option<f64>,
    pub omega_fraction: f64,
    pub is_pan: bool,
    pub has_duplicate: bool,
    pub cut_id: u64,
    pub accepted: bool,
    pub reject_reason: Option<RejectReason>,
}

fn validate_cuts(cuts: &[Cut], frame_count: usize) -> Result<Vec<Cut>> {
    if frame_count < 3 {
        return Err(Error::InvalidInput(format!(
            "mining needs at least 3 frames, got {frame_count}"
        )));
    }
    let mut sorted = cuts.to_vec();
    sorted.sort_by_key(|c| c.start);
    let mut expected = 0usize;
    for c in &sorted {
        if c.start > c.end {
            return Err(Error::InvalidInput(format!(
                "cut {} starts at {} after its end {}",
                c.id, c.start, c.end
            )));
        }
        if c.start != expected {
            return Err(Error::InvalidInput(format!(
                "cut {} starts at frame {} but frame {} is the next uncovered one",
                c.id, c.start, expected
            )));
        }
        expected = c.end + 1;
    }
    if expected != frame_count {
        return Err(Error::InvalidInput(format!(
            "cuts cover frames 0..{expected} but the sequence has {frame_count}"
        )));
    }
    let mut ids: Vec<u64> = sorted.iter().map(|c| c.id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("cut ids must be unique".into()));
    }
    Ok(sorted)
}

/// Rates every triplet of every cut and draws one accepted triplet per cut.
///
/// Records come out in frame order. The output depends only on the inputs and
/// `params.seed`, not on the size of the thread pool.
pub fn mine(
    frames: &dyn FrameSource,
    flows: &dyn FlowSource,
    cuts: &[Cut],
    params: &MineParams,
) -> Result<Vec<TripletRecord>> {
    let cuts = validate_cuts(cuts, frames.len())?;
    let mut out = Vec::new();
    for cut in &cuts {
        out.extend(mine_cut(frames, flows, cut, params)?);
    }
    Ok(out)
}

fn mine_cut(
    frames: &dyn FrameSource,
    flows: &dyn FlowSource,
    cut: &Cut,
    params: &MineParams,
) -> Result<Vec<TripletRecord>> {
    let indices: Vec<usize> = (cut.start..=cut.end).collect();
    let images: Vec<ImageF32> = indices
        .par_iter()
        .map(|&i| frames.load(i))
        .collect::<Result<_>>()?;
    let image = |i: usize| &images[i - cut.start];

    let duplicate = |a: usize, b: usize| -> Result<bool> {
        match &params.dedup {
            Some(model) => Ok(model.is_duplicate(dedup_features(image(a), image(b))?)),
            None => Ok(false),
        }
    };

    // A frame that repeats its predecessor is dropped before triplets are formed.
    let repeats: Vec<bool> = indices[1..]
        .par_iter()
        .map(|&i| duplicate(i - 1, i))
        .collect::<Result<_>>()?;
    let kept: Vec<usize> = std::iter::once(cut.start)
        .chain(
            indices[1..]
                .iter()
                .zip(&repeats)
                .filter(|(_, &r)| !r)
                .map(|(&i, _)| i),
        )
        .collect();

    let mut records: Vec<TripletRecord> = kept
        .par_windows(3)
        .map(|w| {
            rate_triplet(
                frames,
                flows,
                w[0],
                w[1],
                w[2],
                cut.id,
                params,
                &duplicate,
                image(w[1]),
            )
        })
        .collect::<Result<_>>()?;

    let candidates: Vec<usize> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.reject_reason.is_none())
        .map(|(i, _)| i)
        .collect();
    if !candidates.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(cut.id);
        let chosen = candidates[rng.random_range(0..candidates.len())];
        for &i in &candidates {
            if i == chosen {
                records[i].accepted = true;
            } else {
                records[i].reject_reason = Some(RejectReason::NotSelected);
            }
        }
    }
    Ok(records)
}

#[allow(clippy::too_many_arguments)]
fn rate_triplet(
    frames: &dyn FrameSource,
    flows: &dyn FlowSource,
    prev: usize,
    mid: usize,
    next: usize,
    cut_id: u64,
    params: &MineParams,
    duplicate: &(dyn Fn(usize, usize) -> Result<bool> + Sync),
    mid_image: &ImageF32,
) -> Result<TripletRecord> {
    let mut record = TripletRecord {
        prev: frames.name(prev),
        mid: frames.name(mid),
        next: frames.name(next),
        rrld: None,
        omega_fraction: 0.0,
        is_pan: false,
        has_duplicate: duplicate(prev, mid)? || duplicate(mid, next)? || duplicate(prev, next)?,
        cut_id,
        accepted: false,
        reject_reason: None,
    };

    let (to_prev, to_next) = match (flows.flow(mid, prev)?, flows.flow(mid, next)?) {
        (Some(p), Some(n)) => (p, n),
        _ => {
            record.reject_reason = Some(RejectReason::MissingFlow);
            return Ok(record);
        }
    };
    let (h, w) = (mid_image.height(), mid_image.width());
    to_prev.ensure_matches(h, w, &format!("flow {mid}->{prev}"))?;
    to_next.ensure_matches(h, w, &format!("flow {mid}->{next}"))?;
    let triplet = TripletFlows::new(to_prev, to_next)?;

    let omega = restricted_set(&triplet, params.min_norm);
    record.omega_fraction = omega.count() as f64 / (h * w) as f64;
    record.is_pan = detect_pan(&triplet, &omega, &params.pan.scaled_to_height(h));
    match rrld_over(&triplet, &omega) {
        Ok(v) => record.rrld = Some(v),
        Err(Error::NoValidPixels) => {}
        Err(e) => return Err(e),
    }

    record.reject_reason = if record.has_duplicate {
        Some(RejectReason::Duplicate)
    } else if record.rrld.is_none() {
        Some(RejectReason::NoValidPixels)
    } else if record.is_pan {
        Some(RejectReason::Pan)
    } else if record.rrld.is_some_and(|v| v >= params.rrld_threshold) {
        Some(RejectReason::Rrld)
    } else {
        None
    };
    Ok(record)
}
