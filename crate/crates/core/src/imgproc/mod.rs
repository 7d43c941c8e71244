//! Image containers and the low-level pixel operations every other stage
//! builds on: color conversion, separable Gaussian blur and binary morphology.

pub(crate) mod blur;
mod color;
mod morph;

pub use blur::{gaussian_blur, gaussian_kernel};
pub use color::{rgb_to_lab, to_grayscale, to_grayscale_with, GrayWeights, REC601};
pub use morph::{dilate, erode, morph_open};

use crate::error::{Error, Result};

/// Planar `f32` image: `channels` planes of `height * width` row-major values.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageF32 {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageF32 {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidInput(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if !(1..=3).contains(&channels) {
            return Err(Error::InvalidInput(format!(
                "channel count must be 1, 2 or 3, got {channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::InvalidInput(format!(
                "data length {} does not match {height}x{width}x{channels}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite pixel value {bad}")));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    /// Builds an image without validation. Callers guarantee the invariants.
    pub(crate) fn from_raw(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), height * width * channels);
        Self {
            height,
            width,
            channels,
            data,
        }
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f32) -> Self {
        assert!(height > 0 && width > 0 && (1..=3).contains(&channels));
        assert!(value.is_finite());
        Self::from_raw(
            height,
            width,
            channels,
            vec![value; height * width * channels],
        )
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Self::filled(height, width, channels, 0.0)
    }

    /// Builds an image by evaluating `f(channel, y, x)` at every sample.
    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Self {
        assert!(height > 0 && width > 0 && (1..=3).contains(&channels));
        let mut data = Vec::with_capacity(height * width * channels);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    let v = f(c, y, x);
                    assert!(v.is_finite(), "from_fn produced non-finite value {v}");
                    data.push(v);
                }
            }
        }
        Self::from_raw(height, width, channels, data)
    }

    /// Stacks single-channel planes into one image.
    pub fn from_planes(height: usize, width: usize, planes: &[&[f32]]) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * planes.len());
        for p in planes {
            data.extend_from_slice(p);
        }
        Self::new(height, width, planes.len(), data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.pixel_count();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f32] {
        let n = self.pixel_count();
        &mut self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f32) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    /// Applies `f` to every sample.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> Self {
        Self::from_raw(
            self.height,
            self.width,
            self.channels,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Copies out the rectangle starting at `(top, left)`.
    pub fn crop(&self, top: usize, left: usize, height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 || top + height > self.height || left + width > self.width {
            return Err(Error::InvalidInput(format!(
                "crop {height}x{width}+{left}+{top} outside {}x{} image",
                self.height, self.width
            )));
        }
        let mut data = Vec::with_capacity(height * width * self.channels);
        for c in 0..self.channels {
            let plane = self.plane(c);
            for y in top..top + height {
                let row = y * self.width;
                data.extend_from_slice(&plane[row + left..row + left + width]);
            }
        }
        Ok(Self::from_raw(height, width, self.channels, data))
    }

    /// Nearest-neighbor integer upscaling.
    pub fn upscale_nearest(&self, factor: usize) -> Self {
        assert!(factor >= 1);
        Self::from_fn(
            self.height * factor,
            self.width * factor,
            self.channels,
            |c, y, x| self.get(c, y / factor, x / factor),
        )
    }

    pub(crate) fn ensure_same_size(&self, other: &Self, what: &str) -> Result<()> {
        if self.height != other.height || self.width != other.width {
            return Err(Error::InvalidInput(format!(
                "{what}: size mismatch {}x{} vs {}x{}",
                self.height, self.width, other.height, other.width
            )));
        }
        Ok(())
    }

    pub(crate) fn ensure_channels(&self, channels: usize, what: &str) -> Result<()> {
        if self.channels != channels {
            return Err(Error::InvalidInput(format!(
                "{what}: expected {channels} channels, got {}",
                self.channels
            )));
        }
        Ok(())
    }
}

/// Boolean pixel grid, `true` marks foreground.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidInput(format!(
                "mask dimensions must be positive, got {height}x{width}"
            )));
        }
        if bits.len() != height * width {
            return Err(Error::InvalidInput(format!(
                "mask length {} does not match {height}x{width}",
                bits.len()
            )));
        }
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    pub(crate) fn from_raw(height: usize, width: usize, bits: Vec<bool>) -> Self {
        debug_assert_eq!(bits.len(), height * width);
        Self {
            height,
            width,
            bits,
        }
    }

    pub fn filled(height: usize, width: usize, value: bool) -> Self {
        assert!(height > 0 && width > 0);
        Self::from_raw(height, width, vec![value; height * width])
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        assert!(height > 0 && width > 0);
        let mut bits = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(y, x));
            }
        }
        Self::from_raw(height, width, bits)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Nearest-neighbor integer upscaling.
    pub fn upscale_nearest(&self, factor: usize) -> Self {
        assert!(factor >= 1);
        Self::from_fn(self.height * factor, self.width * factor, |y, x| {
            self.get(y / factor, x / factor)
        })
    }

    /// 1.0 for foreground, 0.0 for background.
    pub fn to_image(&self) -> ImageF32 {
        ImageF32::from_raw(
            self.height,
            self.width,
            1,
            self.bits
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        )
    }

    pub(crate) fn same_size_as(&self, height: usize, width: usize) -> bool {
        self.height == height && self.width == width
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(ImageF32::new(0, 3, 1, vec![]).is_err());
        assert!(ImageF32::new(2, 2, 4, vec![0.0; 16]).is_err());
        assert!(ImageF32::new(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(ImageF32::new(1, 1, 1, vec![f32::NAN]).is_err());
        assert!(BinaryMask::new(2, 2, vec![true; 3]).is_err());
    }

    #[test]
    fn planar_layout() {
        let img = ImageF32::from_fn(2, 3, 2, |c, y, x| (c * 100 + y * 10 + x) as f32);
        assert_eq!(img.plane(1)[4], 111.0);
        assert_eq!(img.get(0, 1, 2), 12.0);
        let cropped = img.crop(1, 1, 1, 2).unwrap();
        assert_eq!(cropped.data(), &[11.0, 12.0, 111.0, 112.0]);
        assert!(img.crop(1, 2, 1, 2).is_err());
    }
}
