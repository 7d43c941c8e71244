//! Chamfer distance, PSNR and SSIM of a drawing against shifted copies.

use celforge::eval::{chamfer_eval, psnr, ssim};
use celforge::imgproc::ImageF32;
use celforge::linework::DogParams;

fn drawing(shift: usize) -> ImageF32 {
    ImageF32::from_fn(120, 160, 3, |_, y, x| {
        let (left, right) = (40 + shift, 120 + shift);
        let box_edge = ((y == 30 || y == 90) && (left..=right).contains(&x))
            || ((x == left || x == right) && (30..=90).contains(&y));
        if box_edge {
            0.0
        } else {
            1.0
        }
    })
}

fn main() -> celforge::Result<()> {
    let gt = drawing(0);
    let params = DogParams::default().scaled_to_height(gt.height());
    println!("shift  CD(x1e5)    PSNR    SSIM");
    for shift in [0, 1, 2, 4, 8] {
        let pred = drawing(shift);
        let cd = chamfer_eval(&pred, &gt, &params)?;
        let p = psnr(&pred, &gt)?;
        let s = ssim(&pred, &gt)?;
        println!("{shift:>5}  {:>8.3}  {p:>6.2}  {s:.4}", cd * 1e5);
    }
    Ok(())
}
