//! Mining over an in-memory sequence: one cut of steady motion, one with a
//! held frame and a sudden turn.

use celforge::formats::manifest_to_string;
use celforge::imgproc::ImageF32;
use celforge::mining::{mine, Cut, DedupModel, FlowSource, FrameSource, MineParams};
use celforge::warp::FlowField;
use celforge::Result;

const H: usize = 60;
const W: usize = 80;

// Position of the moving patch in each frame.
const POS: [(f32, f32); 12] = [
    (0.0, 0.0),
    (5.0, 0.0),
    (10.0, 0.0),
    (15.0, 0.0),
    (20.0, 0.0),
    (25.0, 0.0),
    (0.0, 0.0),
    (4.0, 0.0),
    (4.0, 0.0),
    (8.0, 0.0),
    (8.0, 6.0),
    (8.0, 12.0),
];

struct Synthetic;

impl FrameSource for Synthetic {
    fn len(&self) -> usize {
        POS.len()
    }

    fn name(&self, index: usize) -> String {
        format!("frame{index:02}")
    }

    fn load(&self, index: usize) -> Result<ImageF32> {
        let (px, py) = POS[index];
        Ok(ImageF32::from_fn(H, W, 3, |c, y, x| {
            let (u, v) = (x as f32 - px, y as f32 - py);
            0.5 + 0.4 * (u * 0.31 + c as f32).sin() * (v * 0.23).cos()
        }))
    }
}

struct PatchFlows;

impl FlowSource for PatchFlows {
    fn flow(&self, from: usize, to: usize) -> Result<Option<FlowField>> {
        let d = (POS[to].0 - POS[from].0, POS[to].1 - POS[from].1);
        Ok(Some(FlowField::from_fn(H, W, |y, x| {
            if (15..35).contains(&y) && (20..50).contains(&x) {
                d
            } else {
                (0.0, 0.0)
            }
        })))
    }
}

fn main() -> Result<()> {
    let cuts = [
        Cut {
            id: 0,
            start: 0,
            end: 5,
        },
        Cut {
            id: 1,
            start: 6,
            end: 11,
        },
    ];
    let params = MineParams {
        seed: 42,
        // Frames closer than 0.5 mean LAB units count as repeats.
        dedup: Some(DedupModel {
            bias: 1.0,
            w_mean: -1.0,
            w_max: 0.0,
            threshold: 0.5,
        }),
        ..MineParams::default()
    };
    let records = mine(&Synthetic, &PatchFlows, &cuts, &params)?;
    print!("{}", manifest_to_string(&records));
    for r in records.iter().filter(|r| r.accepted) {
        println!(
            "cut {}: {} {} {} (rrld {:.3})",
            r.cut_id,
            r.prev,
            r.mid,
            r.next,
            r.rrld.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
