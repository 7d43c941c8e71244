use serde::{Deserialize, Serialize};

use crate::imgproc::BinaryMask;
use crate::linework::REFERENCE_HEIGHT;
use crate::mining::TripletFlows;

/// Thresholds for recognizing a camera pan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PanParams {
    /// Minimum fraction of the frame inside the restricted set.
    pub frac_min: f64,
    /// Minimum mean flow magnitude in pixels, at a 540-row frame.
    pub mag_min: f64,
    /// Maximum variance of each flow component, in squared pixels.
    pub var_max: f64,
}

impl Default for PanParams {
    fn default() -> Self {
        Self {
            frac_min: 0.5,
            mag_min: 10.0,
            var_max: 1.0,
        }
    }
}

impl PanParams {
    /// Scales the magnitude threshold from the 540-row reference to `height`.
    pub fn scaled_to_height(&self, height: usize) -> Self {
        Self {
            mag_min: self.mag_min * height as f64 / REFERENCE_HEIGHT as f64,
            ..*self
        }
    }
}

/// A pan covers most of the frame with large, nearly uniform motion.
pub fn detect_pan(flows: &TripletFlows, omega: &BinaryMask, params: &PanParams) -> bool {
    let members: Vec<usize> = omega
        .bits()
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect();
    if members.is_empty() {
        return false;
    }
    let n = members.len() as f64;
    let fraction = n / (flows.height() * flows.width()) as f64;

    let components = [
        flows.flow_to_prev.u(),
        flows.flow_to_prev.v(),
        flows.flow_to_next.u(),
        flows.flow_to_next.v(),
    ];
    let magnitude: f64 = members
        .iter()
        .map(|&i| {
            let p = (components[0][i] as f64).hypot(components[1][i] as f64);
            let q = (components[2][i] as f64).hypot(components[3][i] as f64);
            0.5 * (p + q)
        })
        .sum::<f64>()
        / n;

    let low_variance = components.iter().all(|comp| {
        let mean = members.iter().map(|&i| comp[i] as f64).sum::<f64>() / n;
        let var = members
            .iter()
            .map(|&i| {
                let d = comp[i] as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        var < params.var_max
    });

    fraction > params.frac_min && magnitude > params.mag_min && low_variance
}
