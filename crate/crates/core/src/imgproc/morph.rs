use crate::error::{Error, Result};
use crate::imgproc::BinaryMask;

fn check_kernel(k: usize) -> Result<usize> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "structuring element side must be odd and positive, got {k}"
        )));
    }
    Ok(k / 2)
}

// One separable pass over lines of `len` samples spaced `stride` apart.
// Out-of-bounds samples count as background, so erosion needs the whole
// window inside the line and dilation ignores the outside.
fn pass(
    src: &[bool],
    lines: usize,
    len: usize,
    line_step: usize,
    stride: usize,
    radius: usize,
    erode: bool,
) -> Vec<bool> {
    let mut out = vec![false; src.len()];
    let mut prefix = vec![0usize; len + 1];
    for line in 0..lines {
        let base = line * line_step;
        for i in 0..len {
            prefix[i + 1] = prefix[i] + src[base + i * stride] as usize;
        }
        for i in 0..len {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius + 1).min(len);
            let count = prefix[hi] - prefix[lo];
            out[base + i * stride] = if erode {
                count == 2 * radius + 1
            } else {
                count > 0
            };
        }
    }
    out
}

fn separable(mask: &BinaryMask, radius: usize, erode: bool) -> BinaryMask {
    let (h, w) = (mask.height(), mask.width());
    let rows = pass(mask.bits(), h, w, w, 1, radius, erode);
    let cols = pass(&rows, w, h, 1, w, radius, erode);
    BinaryMask::from_raw(h, w, cols)
}

/// Erosion with a `k`x`k` square; pixels near the frame edge erode away.
pub fn erode(mask: &BinaryMask, k: usize) -> Result<BinaryMask> {
    let r = check_kernel(k)?;
    Ok(separable(mask, r, true))
}

/// Dilation with a `k`x`k` square.
pub fn dilate(mask: &BinaryMask, k: usize) -> Result<BinaryMask> {
    let r = check_kernel(k)?;
    Ok(separable(mask, r, false))
}

/// Morphological opening (erosion then dilation) with a `k`x`k` square.
pub fn morph_open(mask: &BinaryMask, k: usize) -> Result<BinaryMask> {
    let r = check_kernel(k)?;
    Ok(separable(&separable(mask, r, true), r, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(mask: &BinaryMask, k: usize, erode: bool) -> BinaryMask {
        let r = (k / 2) as isize;
        let (h, w) = (mask.height() as isize, mask.width() as isize);
        BinaryMask::from_fn(mask.height(), mask.width(), |y, x| {
            let mut all = true;
            let mut any = false;
            for dy in -r..=r {
                for dx in -r..=r {
                    let (sy, sx) = (y as isize + dy, x as isize + dx);
                    let v = sy >= 0
                        && sx >= 0
                        && sy < h
                        && sx < w
                        && mask.get(sy as usize, sx as usize);
                    all &= v;
                    any |= v;
                }
            }
            if erode {
                all
            } else {
                any
            }
        })
    }

    fn brute_open(mask: &BinaryMask, k: usize) -> BinaryMask {
        brute(&brute(mask, k, true), k, false)
    }

    #[test]
    fn kernel_validation() {
        let m = BinaryMask::filled(4, 4, true);
        assert!(morph_open(&m, 0).is_err());
        assert!(morph_open(&m, 4).is_err());
        assert!(erode(&m, 2).is_err());
    }

    #[test]
    fn unit_kernel_is_identity() {
        let m = BinaryMask::from_fn(6, 7, |y, x| (y * 3 + x) % 4 == 0);
        assert_eq!(morph_open(&m, 1).unwrap(), m);
    }

    #[test]
    fn isolated_pixel_vanishes() {
        let mut m = BinaryMask::filled(9, 9, false);
        m.set(4, 4, true);
        assert!(morph_open(&m, 5).unwrap().is_empty());
    }

    #[test]
    fn solid_block_matches_brute_force() {
        let m = BinaryMask::from_fn(20, 20, |y, x| (5..15).contains(&y) && (5..15).contains(&x));
        let got = morph_open(&m, 5).unwrap();
        assert_eq!(got, brute_open(&m, 5));
        // A block larger than the element survives opening intact.
        assert_eq!(got, m);
    }

    #[test]
    fn full_frame_survives_opening() {
        let m = BinaryMask::filled(8, 8, true);
        assert_eq!(morph_open(&m, 5).unwrap(), m);
        let e = erode(&m, 5).unwrap();
        assert!(!e.get(1, 1) && e.get(2, 2));
    }

    fn arb_mask() -> impl Strategy<Value = BinaryMask> {
        (1usize..14, 1usize..14).prop_flat_map(|(h, w)| {
            proptest::collection::vec(proptest::bool::weighted(0.6), h * w)
                .prop_map(move |bits| BinaryMask::new(h, w, bits).unwrap())
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force(m in arb_mask(), k in prop::sample::select(vec![1usize, 3, 5, 7])) {
            prop_assert_eq!(erode(&m, k).unwrap(), brute(&m, k, true));
            prop_assert_eq!(dilate(&m, k).unwrap(), brute(&m, k, false));
        }

        #[test]
        fn opening_is_idempotent_and_anti_extensive(m in arb_mask(), k in prop::sample::select(vec![1usize, 3, 5])) {
            let once = morph_open(&m, k).unwrap();
            let twice = morph_open(&once, k).unwrap();
            prop_assert_eq!(&once, &twice);
            for (o, i) in once.bits().iter().zip(m.bits()) {
                prop_assert!(!*o || *i);
            }
        }
    }
}
