use std::path::Path;

use image::{ExtendedColorType, ImageFormat};

use crate::error::{Error, Result};
use crate::imgproc::{BinaryMask, ImageF32};

fn image_err(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        source => Error::Image {
            path: path.to_path_buf(),
            source,
        },
    }
}

/// Loads any PNG as a 3-channel image with values `byte / 255`. Gray inputs
/// are replicated to RGB and alpha is dropped.
pub fn read_png(path: impl AsRef<Path>) -> Result<ImageF32> {
    let path = path.as_ref();
    let reader = image::ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let rgb = reader
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| image_err(path, e))?
        .to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let raw = rgb.as_raw();
    Ok(ImageF32::from_fn(h, w, 3, |c, y, x| {
        raw[(y * w + x) * 3 + c] as f32 / 255.0
    }))
}

fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes a 1-channel image as 8-bit gray or a 3-channel image as 8-bit RGB.
pub fn write_png(img: &ImageF32, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (h, w, c) = img.shape();
    let color = match c {
        1 => ExtendedColorType::L8,
        3 => ExtendedColorType::Rgb8,
        _ => {
            return Err(Error::InvalidInput(format!(
                "PNG output needs 1 or 3 channels, image has {c}"
            )))
        }
    };
    let mut buf = Vec::with_capacity(h * w * c);
    for y in 0..h {
        for x in 0..w {
            buf.extend((0..c).map(|ch| quantize(img.get(ch, y, x))));
        }
    }
    save(path, &buf, w, h, color)
}

/// Writes `true` as 255 and `false` as 0.
pub fn write_mask_png(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let buf: Vec<u8> = mask
        .bits()
        .iter()
        .map(|&b| if b { 255 } else { 0 })
        .collect();
    save(
        path.as_ref(),
        &buf,
        mask.width(),
        mask.height(),
        ExtendedColorType::L8,
    )
}

pub fn write_gray8(
    bytes: &[u8],
    height: usize,
    width: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    save(path.as_ref(), bytes, width, height, ExtendedColorType::L8)
}

fn save(path: &Path, buf: &[u8], w: usize, h: usize, color: ExtendedColorType) -> Result<()> {
    let dim = |n: usize| {
        u32::try_from(n)
            .map_err(|_| Error::InvalidInput(format!("dimension {n} too large for PNG")))
    };
    image::save_buffer_with_format(path, buf, dim(w)?, dim(h)?, color, ImageFormat::Png)
        .map_err(|e| image_err(path, e))
}
