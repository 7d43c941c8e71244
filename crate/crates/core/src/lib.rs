//! Line-based perceptual metrics, flow-driven forward warping and
//! training-triplet mining for 2D animation frames.
//!
//! Images are planar `f32` in `[0, 1]` ([`imgproc::ImageF32`]); flows are
//! per-pixel displacements in pixels ([`warp::FlowField`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod eval;
pub mod formats;
pub mod imgproc;
pub mod linework;
pub mod mining;
pub mod warp;

pub use config::Config;
pub use error::{Error, Result};
