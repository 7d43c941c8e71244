//! Line drawing -> DoG sketch -> exact distance transform -> NEDT PNG.
//!
//! cargo run --example edt_nedt [-- OUT_DIR]

use celforge::formats::{write_gray8, write_mask_png, write_png};
use celforge::imgproc::ImageF32;
use celforge::linework::{edt, extract_sketch, normalize_distances, DogParams, DEFAULT_NEDT_TAU};

fn main() -> celforge::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(std::env::temp_dir, Into::into);
    let (h, w) = (180, 320);

    // A circle and a diagonal stroke in dark ink on paper.
    let img = ImageF32::from_fn(h, w, 3, |_, y, x| {
        let (dy, dx) = (y as f32 - 90.0, x as f32 - 110.0);
        let ring = ((dy * dy + dx * dx).sqrt() - 55.0).abs() < 1.5;
        let stroke = (x as i32 - 2 * y as i32 - 60).abs() < 2 && x > 180;
        if ring || stroke {
            0.05
        } else {
            0.95
        }
    });

    let params = DogParams::default().scaled_to_height(h);
    let sketch = extract_sketch(&img, &params)?;
    let dist = edt(&sketch);
    let nedt = normalize_distances(&dist, DEFAULT_NEDT_TAU)?;

    let far = dist.values().iter().copied().fold(0.0f32, f32::max);
    println!(
        "{} line pixels, farthest pixel {far:.1} px from a line",
        sketch.count()
    );

    write_png(&img, out.join("drawing.png"))?;
    write_mask_png(&sketch, out.join("sketch.png"))?;
    write_gray8(&nedt.to_gray8(), h, w, out.join("nedt.png"))?;
    println!(
        "wrote drawing.png, sketch.png, nedt.png to {}",
        out.display()
    );
    Ok(())
}
