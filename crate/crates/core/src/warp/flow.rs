use crate::error::{Error, Result};
use crate::imgproc::ImageF32;

/// Per-pixel displacement in pixels: channel 0 is `u` (+x, rightward),
/// channel 1 is `v` (+y, downward).
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField(ImageF32);

impl FlowField {
    pub fn new(height: usize, width: usize, u: Vec<f32>, v: Vec<f32>) -> Result<Self> {
        let n = height * width;
        if u.len() != n || v.len() != n {
            return Err(Error::InvalidInput(format!(
                "flow components have {} and {} values, expected {n}",
                u.len(),
                v.len()
            )));
        }
        let mut data = u;
        data.extend(v);
        Ok(Self(ImageF32::new(height, width, 2, data)?))
    }

    pub fn from_image(img: ImageF32) -> Result<Self> {
        img.ensure_channels(2, "flow field")?;
        Ok(Self(img))
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self(ImageF32::zeros(height, width, 2))
    }

    pub fn uniform(height: usize, width: usize, u: f32, v: f32) -> Self {
        Self::from_fn(height, width, |_, _| (u, v))
    }

    /// Evaluates `f(y, x) -> (u, v)` at every pixel.
    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> (f32, f32)) -> Self {
        Self(ImageF32::from_fn(height, width, 2, |c, y, x| {
            let (u, v) = f(y, x);
            if c == 0 {
                u
            } else {
                v
            }
        }))
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn u(&self) -> &[f32] {
        self.0.plane(0)
    }

    pub fn v(&self) -> &[f32] {
        self.0.plane(1)
    }

    #[inline]
    pub fn at(&self, y: usize, x: usize) -> (f32, f32) {
        (self.0.get(0, y, x), self.0.get(1, y, x))
    }

    pub fn as_image(&self) -> &ImageF32 {
        &self.0
    }

    pub fn into_image(self) -> ImageF32 {
        self.0
    }

    /// Every vector multiplied by `s`.
    pub fn scaled(&self, s: f32) -> Self {
        Self(self.0.map(|v| v * s))
    }

    pub(crate) fn ensure_matches(&self, height: usize, width: usize, what: &str) -> Result<()> {
        if self.height() != height || self.width() != width {
            return Err(Error::InvalidInput(format!(
                "{what}: flow is {}x{} but image is {height}x{width}",
                self.height(),
                self.width()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_scaling() {
        let f = FlowField::from_fn(2, 3, |y, x| (x as f32, -(y as f32)));
        assert_eq!(f.at(1, 2), (2.0, -1.0));
        assert_eq!(f.scaled(0.5).at(1, 2), (1.0, -0.5));
        assert!(FlowField::new(2, 2, vec![0.0; 4], vec![0.0; 3]).is_err());
        assert!(FlowField::from_image(ImageF32::zeros(2, 2, 3)).is_err());
    }
}
