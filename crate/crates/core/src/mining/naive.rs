use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::eval::ssim;
use crate::imgproc::ImageF32;

/// Which frame pairs of a triplet the SSIM bounds apply to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairPolicy {
    /// prev-mid, mid-next and prev-next.
    #[default]
    All,
    /// prev-mid and mid-next only.
    Consecutive,
}

/// SSIM-window triplet filter used as a naive baseline to linearity scoring.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NaiveSsimFilter {
    pub low: f64,
    pub high: f64,
    pub pairs: PairPolicy,
}

impl Default for NaiveSsimFilter {
    fn default() -> Self {
        Self {
            low: 0.75,
            high: 0.95,
            pairs: PairPolicy::All,
        }
    }
}

/// Accepts a triplet when every checked pair has SSIM in `[low, high]`.
pub fn naive_ssim_filter(
    prev: &ImageF32,
    mid: &ImageF32,
    next: &ImageF32,
    filter: &NaiveSsimFilter,
) -> Result<bool> {
    prev.ensure_same_size(mid, "naive_ssim_filter")?;
    prev.ensure_same_size(next, "naive_ssim_filter")?;
    let mut pairs = vec![(prev, mid), (mid, next)];
    if filter.pairs == PairPolicy::All {
        pairs.push((prev, next));
    }
    for (a, b) in pairs {
        let s = ssim(a, b)?;
        if !(filter.low..=filter.high).contains(&s) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Small deterministic generator so the test has no RNG dependency.
    fn noise(h: usize, w: usize, seed: u64) -> ImageF32 {
        let mut s = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ImageF32::from_fn(h, w, 1, |_, _, _| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 40) as f32) / (1u64 << 24) as f32
        })
    }

    fn blend(a: &ImageF32, b: &ImageF32, alpha: f32) -> ImageF32 {
        ImageF32::from_fn(a.height(), a.width(), 1, |c, y, x| {
            (1.0 - alpha) * a.get(c, y, x) + alpha * b.get(c, y, x)
        })
    }

    #[test]
    fn identical_frames_are_rejected() {
        let f = noise(24, 24, 1);
        assert!(!naive_ssim_filter(&f, &f, &f, &NaiveSsimFilter::default()).unwrap());
    }

    #[test]
    fn independent_noise_is_rejected() {
        let (a, b, c) = (noise(32, 32, 1), noise(32, 32, 2), noise(32, 32, 3));
        assert!(ssim(&a, &b).unwrap() < 0.75);
        assert!(!naive_ssim_filter(&a, &b, &c, &NaiveSsimFilter::default()).unwrap());
    }

    #[test]
    fn blended_triplet_is_accepted() {
        let base = noise(32, 32, 7);
        let mix = |seed, alpha| blend(&base, &noise(32, 32, seed), alpha);
        // Find the blend weight that puts pairwise SSIM near 0.85.
        let pair_ssim = |alpha: f32| ssim(&mix(11, alpha), &mix(12, alpha)).unwrap();
        let (mut lo, mut hi) = (0.0f32, 0.5f32);
        for _ in 0..30 {
            let m = 0.5 * (lo + hi);
            if pair_ssim(m) > 0.85 {
                lo = m;
            } else {
                hi = m;
            }
        }
        let (a, b, c) = (mix(11, lo), mix(12, lo), mix(13, lo));
        for (x, y) in [(&a, &b), (&b, &c), (&a, &c)] {
            let s = ssim(x, y).unwrap();
            assert!((0.8..0.9).contains(&s), "pair ssim {s}");
        }
        assert!(naive_ssim_filter(&a, &b, &c, &NaiveSsimFilter::default()).unwrap());
    }

    #[test]
    fn consecutive_policy_skips_outer_pair() {
        // prev == next, so only the outer pair is out of range.
        let base = noise(32, 32, 3);
        let other = noise(32, 32, 4);
        let (mut lo, mut hi) = (0.0f32, 1.0f32);
        for _ in 0..30 {
            let m = 0.5 * (lo + hi);
            if ssim(&base, &blend(&base, &other, m)).unwrap() > 0.85 {
                lo = m;
            } else {
                hi = m;
            }
        }
        let mid = blend(&base, &other, lo);
        assert!((ssim(&base, &mid).unwrap() - 0.85).abs() < 0.01);
        let all = NaiveSsimFilter::default();
        let consecutive = NaiveSsimFilter {
            pairs: PairPolicy::Consecutive,
            ..all
        };
        assert!(!naive_ssim_filter(&base, &mid, &base, &all).unwrap());
        assert!(naive_ssim_filter(&base, &mid, &base, &consecutive).unwrap());
    }
}
