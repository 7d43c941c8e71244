//! Flow-based halfway frame from two frames of a moving disc.

use celforge::imgproc::ImageF32;
use celforge::warp::{halfway_guess, FlowField};

fn disc(cx: f32) -> ImageF32 {
    ImageF32::from_fn(64, 96, 3, |c, y, x| {
        let d = ((x as f32 - cx).powi(2) + (y as f32 - 32.0).powi(2)).sqrt();
        if d < 12.0 {
            [0.9, 0.3, 0.2][c]
        } else {
            0.2 + 0.002 * x as f32
        }
    })
}

fn main() -> celforge::Result<()> {
    let (i0, i1, truth) = (disc(30.0), disc(50.0), disc(40.0));
    let inside =
        |y: usize, x: usize| ((x as f32 - 30.0).powi(2) + (y as f32 - 32.0).powi(2)).sqrt() < 12.0;
    let inside1 =
        |y: usize, x: usize| ((x as f32 - 50.0).powi(2) + (y as f32 - 32.0).powi(2)).sqrt() < 12.0;

    // Only the disc moves.
    let f01 = FlowField::from_fn(64, 96, |y, x| {
        if inside(y, x) {
            (20.0, 0.0)
        } else {
            (0.0, 0.0)
        }
    });
    let f10 = FlowField::from_fn(64, 96, |y, x| {
        if inside1(y, x) {
            (-20.0, 0.0)
        } else {
            (0.0, 0.0)
        }
    });

    let out = halfway_guess(&i0, &i1, &f01, &f10, 0.5)?;
    let err: f32 = out
        .image
        .data()
        .iter()
        .zip(truth.data())
        .map(|(a, b)| (a - b).abs())
        .sum::<f32>()
        / truth.data().len() as f32;
    println!("mean absolute error vs true midpoint: {err:.4}");
    println!("pixels covered by neither warp: {}", out.holes().count());
    println!(
        "coverage masks: {} from frame 0, {} from frame 1",
        out.mask_0t.count(),
        out.mask_1t.count()
    );
    Ok(())
}
