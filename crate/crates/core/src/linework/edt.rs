//! Exact Euclidean distance transform.
//!
//! Squared distances are computed with the separable lower-envelope method:
//! a 1D pass along each row, then a pass along each column that takes the
//! lower envelope of the parabolas `(q - v)^2 + f(v)`. Envelope breakpoints
//! are kept as exact rationals so the result is bit-identical to a
//! brute-force nearest-pixel search.

use rayon::prelude::*;

use crate::linework::BinarySketch;

/// Squared distance reported for pixels when the sketch has no line pixels.
pub const UNREACHABLE: u64 = u64::MAX;

/// Integer squared distances to the nearest line pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquaredDistances {
    height: usize,
    width: usize,
    values: Vec<u64>,
}

impl SquaredDistances {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Row-major values; [`UNREACHABLE`] when no line pixel exists.
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> u64 {
        self.values[y * self.width + x]
    }

    /// Euclidean distance at `(y, x)`, `+inf` for an empty sketch.
    #[inline]
    pub fn distance(&self, y: usize, x: usize) -> f64 {
        to_distance(self.get(y, x))
    }
}

#[inline]
fn to_distance(sq: u64) -> f64 {
    if sq == UNREACHABLE {
        f64::INFINITY
    } else {
        (sq as f64).sqrt()
    }
}

/// Per-pixel Euclidean distance in pixels; `+inf` is allowed only when the
/// source sketch was empty.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    height: usize,
    width: usize,
    values: Vec<f32>,
}

impl DistanceField {
    pub(crate) fn from_raw(height: usize, width: usize, values: Vec<f32>) -> Self {
        debug_assert_eq!(values.len(), height * width);
        Self {
            height,
            width,
            values,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f32 {
        self.values[y * self.width + x]
    }

    /// Converts to an 8-bit grayscale buffer (`value * 255`, rounded, saturated).
    pub fn to_gray8(&self) -> Vec<u8> {
        self.values
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }
}

impl From<&SquaredDistances> for DistanceField {
    fn from(sq: &SquaredDistances) -> Self {
        DistanceField::from_raw(
            sq.height,
            sq.width,
            sq.values.iter().map(|&v| to_distance(v) as f32).collect(),
        )
    }
}

/// Exact Euclidean distance transform of a sketch.
pub fn edt(sketch: &BinarySketch) -> DistanceField {
    DistanceField::from(&squared_edt(sketch))
}

/// Exact squared distances, rows then columns.
pub fn squared_edt(sketch: &BinarySketch) -> SquaredDistances {
    let (h, w) = (sketch.height(), sketch.width());

    let mut rows = vec![UNREACHABLE; h * w];
    rows.par_chunks_mut(w)
        .zip(sketch.bits().par_chunks(w))
        .for_each(|(out, bits)| row_pass(bits, out));

    // Columns are processed as rows of the transpose.
    let mut cols = transpose(&rows, h, w);
    cols.par_chunks_mut(h)
        .for_each_init(|| Envelope::with_capacity(h), |env, col| env.run(col));

    SquaredDistances {
        height: h,
        width: w,
        values: transpose(&cols, w, h),
    }
}

fn row_pass(bits: &[bool], out: &mut [u64]) {
    let n = bits.len();
    let mut last: Option<usize> = None;
    for i in 0..n {
        if bits[i] {
            last = Some(i);
        }
        if let Some(l) = last {
            let d = (i - l) as u64;
            out[i] = d * d;
        }
    }
    let mut next: Option<usize> = None;
    for i in (0..n).rev() {
        if bits[i] {
            next = Some(i);
        }
        if let Some(r) = next {
            let d = (r - i) as u64;
            out[i] = out[i].min(d * d);
        }
    }
}

fn transpose(src: &[u64], h: usize, w: usize) -> Vec<u64> {
    const BLOCK: usize = 32;
    let mut dst = vec![0u64; h * w];
    for by in (0..h).step_by(BLOCK) {
        for bx in (0..w).step_by(BLOCK) {
            for y in by..(by + BLOCK).min(h) {
                for x in bx..(bx + BLOCK).min(w) {
                    dst[x * h + y] = src[y * w + x];
                }
            }
        }
    }
    dst
}

/// Lower envelope scratch space for one 1D line.
struct Envelope {
    sites: Vec<i64>,
    // Left breakpoint of each envelope segment as numerator / denominator;
    // `None` marks -inf.
    bounds: Vec<Option<(i128, i128)>>,
    input: Vec<u64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Self {
            sites: Vec::with_capacity(n),
            bounds: Vec::with_capacity(n),
            input: Vec::with_capacity(n),
        }
    }

    // Abscissa where the parabolas rooted at `p` and `q` (p < q) cross.
    #[inline]
    fn crossing(f: &[u64], p: i64, q: i64) -> (i128, i128) {
        let fp = f[p as usize] as i128 + (p as i128) * (p as i128);
        let fq = f[q as usize] as i128 + (q as i128) * (q as i128);
        (fq - fp, 2 * (q - p) as i128)
    }

    fn run(&mut self, line: &mut [u64]) {
        self.input.clear();
        self.input.extend_from_slice(line);
        self.sites.clear();
        self.bounds.clear();
        let f = &self.input;

        for q in 0..f.len() as i64 {
            if f[q as usize] == UNREACHABLE {
                continue;
            }
            loop {
                let Some(&top) = self.sites.last() else {
                    self.sites.push(q);
                    self.bounds.push(None);
                    break;
                };
                let (num, den) = Self::crossing(f, top, q);
                // Pop the top parabola while the new crossing lies at or
                // left of its own left breakpoint.
                let dominated = match self.bounds[self.bounds.len() - 1] {
                    None => false,
                    Some((zn, zd)) => num * zd <= zn * den,
                };
                if dominated {
                    self.sites.pop();
                    self.bounds.pop();
                    continue;
                }
                self.sites.push(q);
                self.bounds.push(Some((num, den)));
                break;
            }
        }

        if self.sites.is_empty() {
            line.fill(UNREACHABLE);
            return;
        }

        let mut k = 0;
        for (q, out) in line.iter_mut().enumerate() {
            let q = q as i128;
            while k + 1 < self.sites.len() {
                let (zn, zd) = self.bounds[k + 1].expect("inner breakpoints are finite");
                if zn < q * zd {
                    k += 1;
                } else {
                    break;
                }
            }
            let v = self.sites[k];
            let d = q as i64 - v;
            *out = (d * d) as u64 + f[v as usize];
        }
    }
}

/// Reference implementations used to check the production transform.
pub mod oracle {
    use super::{SquaredDistances, UNREACHABLE};
    use crate::linework::BinarySketch;

    /// Nearest line pixel by exhaustive search over all line pixels.
    pub fn brute_force_squared_edt(sketch: &BinarySketch) -> SquaredDistances {
        let (h, w) = (sketch.height(), sketch.width());
        let points: Vec<(i64, i64)> = (0..h)
            .flat_map(|y| (0..w).map(move |x| (y, x)))
            .filter(|&(y, x)| sketch.get(y, x))
            .map(|(y, x)| (y as i64, x as i64))
            .collect();
        let mut values = Vec::with_capacity(h * w);
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let best = points
                    .iter()
                    .map(|&(py, px)| ((py - y) * (py - y) + (px - x) * (px - x)) as u64)
                    .min()
                    .unwrap_or(UNREACHABLE);
                values.push(best);
            }
        }
        SquaredDistances {
            height: h,
            width: w,
            values,
        }
    }
}
