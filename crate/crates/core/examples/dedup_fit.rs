//! Fit a duplicate-frame detector on labelled pairs and save it.

use celforge::imgproc::ImageF32;
use celforge::mining::{dedup_features, fit_dedup, DedupModel, DedupSample};

fn frame(phase: f32, noise: u32) -> ImageF32 {
    // Re-encoded holds differ by a little compression-like noise.
    ImageF32::from_fn(48, 64, 3, |c, y, x| {
        let n = ((x as u32 * 7919 + y as u32 * 104729 + c as u32 * 13 + noise) % 97) as f32 / 97.0;
        (0.5 + 0.4 * (x as f32 * 0.2 + phase + c as f32).sin() * (y as f32 * 0.15).cos() + 0.01 * n)
            .clamp(0.0, 1.0)
    })
}

fn main() -> celforge::Result<()> {
    let mut samples = Vec::new();
    for k in 0..6 {
        let phase = k as f32 * 0.8;
        samples.push(DedupSample {
            features: dedup_features(&frame(phase, 0), &frame(phase, 1 + k))?,
            is_duplicate: true,
        });
        samples.push(DedupSample {
            features: dedup_features(&frame(phase, 0), &frame(phase + 0.1 + 0.05 * k as f32, 0))?,
            is_duplicate: false,
        });
    }
    let model = fit_dedup(&samples)?;
    println!("model: {}", model.to_string().trim());

    let correct = samples
        .iter()
        .filter(|s| model.is_duplicate(s.features) == s.is_duplicate)
        .count();
    println!("training accuracy: {correct}/{}", samples.len());

    let path = std::env::temp_dir().join("dedup_model.txt");
    std::fs::write(&path, model.to_string()).map_err(|e| celforge::Error::Io {
        path: path.clone(),
        source: e,
    })?;
    let text = std::fs::read_to_string(&path).map_err(|e| celforge::Error::Io {
        path: path.clone(),
        source: e,
    })?;
    let back: DedupModel = text.parse().map_err(celforge::Error::InvalidInput)?;
    assert_eq!(back, model);
    println!("saved to {}", path.display());
    Ok(())
}
