//! Score a batch of predictions and print the report table.

use std::collections::BTreeMap;

use celforge::eval::{aggregate, apply_tags, score_pair};
use celforge::imgproc::ImageF32;
use celforge::linework::DogParams;

fn panel(offset: usize, ink: f32) -> ImageF32 {
    ImageF32::from_fn(96, 128, 3, |_, y, x| {
        let line = x == 30 + offset || y == 50 || (x + y) == 120 + offset;
        if line {
            ink
        } else {
            1.0
        }
    })
}

fn main() -> celforge::Result<()> {
    let params = DogParams::default().scaled_to_height(96);
    let gt = panel(0, 0.0);
    let mut rows = vec![
        score_pair("exact", &gt, &gt, &params)?,
        score_pair("off_by_2", &panel(2, 0.0), &gt, &params)?,
        score_pair("off_by_5", &panel(5, 0.0), &gt, &params)?,
        score_pair("faint", &panel(0, 0.6), &gt, &params)?,
        score_pair("blank", &ImageF32::filled(96, 128, 3, 1.0), &gt, &params)?,
    ];
    let tags: BTreeMap<String, Vec<String>> = [
        ("exact", "eastern"),
        ("off_by_2", "eastern"),
        ("off_by_5", "western"),
        ("faint", "western"),
        ("blank", "western"),
    ]
    .into_iter()
    .map(|(id, t)| (id.to_string(), vec![t.to_string()]))
    .collect();
    apply_tags(&mut rows, &tags);
    let report = aggregate(&rows);
    print!("{}", report.to_table());
    Ok(())
}
