use crate::error::{Error, Result};
use crate::imgproc::{self, ImageF32};
use crate::linework::{self, DogParams};

/// Peak signal-to-noise ratio in dB for images in `[0, 1]`.
///
/// Identical inputs give `f64::INFINITY`.
pub fn psnr(pred: &ImageF32, gt: &ImageF32) -> Result<f64> {
    if pred.shape() != gt.shape() {
        return Err(Error::InvalidInput(format!(
            "psnr: shape mismatch {:?} vs {:?}",
            pred.shape(),
            gt.shape()
        )));
    }
    let sse: f64 = pred
        .data()
        .iter()
        .zip(gt.data())
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum();
    let mse = sse / pred.data().len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / mse).log10())
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

fn ssim_window() -> [f64; SSIM_WINDOW] {
    let r = (SSIM_WINDOW / 2) as f64;
    let mut g = [0.0; SSIM_WINDOW];
    for (i, v) in g.iter_mut().enumerate() {
        let d = i as f64 - r;
        *v = (-(d * d) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = g.iter().sum();
    g.map(|v| v / s)
}

fn gray_f64(img: &ImageF32) -> Result<Vec<f64>> {
    let gray = match img.channels() {
        1 => img.clone(),
        3 => imgproc::to_grayscale(img)?,
        c => {
            return Err(Error::InvalidInput(format!(
                "ssim needs 1 or 3 channels, got {c}"
            )))
        }
    };
    Ok(gray.data().iter().map(|&v| v as f64).collect())
}

// Separable filter keeping only positions where the window fits entirely.
fn filter_valid(src: &[f64], h: usize, w: usize, g: &[f64]) -> Vec<f64> {
    let k = g.len();
    let (oh, ow) = (h + 1 - k, w + 1 - k);
    let mut tmp = vec![0.0; h * ow];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..ow {
            tmp[y * ow + x] = row[x..x + k].iter().zip(g).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for (j, &gw) in g.iter().enumerate() {
            let src_row = &tmp[(y + j) * ow..(y + j + 1) * ow];
            for (o, s) in out[y * ow..(y + 1) * ow].iter_mut().zip(src_row) {
                *o += gw * s;
            }
        }
    }
    out
}

/// Mean structural similarity over every 11x11 Gaussian window (sigma 1.5)
/// that fits inside the image. Color inputs are compared in grayscale.
pub fn ssim(pred: &ImageF32, gt: &ImageF32) -> Result<f64> {
    pred.ensure_same_size(gt, "ssim")?;
    let (h, w) = (pred.height(), pred.width());
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::InvalidInput(format!(
            "ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {h}x{w}"
        )));
    }
    let x = gray_f64(pred)?;
    let y = gray_f64(gt)?;
    let g = ssim_window();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();

    let mu_x = filter_valid(&x, h, w, &g);
    let mu_y = filter_valid(&y, h, w, &g);
    let e_xx = filter_valid(&xx, h, w, &g);
    let e_yy = filter_valid(&yy, h, w, &g);
    let e_xy = filter_valid(&xy, h, w, &g);

    let (c1, c2) = (K1 * K1, K2 * K2);
    let mut total = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let vx = e_xx[i] - mx * mx;
        let vy = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        total +=
            ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    Ok(total / mu_x.len() as f64)
}

/// Chamfer line distance between the DoG sketches of two frames.
pub fn chamfer_eval(pred: &ImageF32, gt: &ImageF32, params: &DogParams) -> Result<f64> {
    pred.ensure_same_size(gt, "chamfer_eval")?;
    let (a, b) = rayon::join(
        || linework::extract_sketch(pred, params),
        || linework::extract_sketch(gt, params),
    );
    linework::chamfer(&a?, &b?)
}
