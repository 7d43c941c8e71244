//! Write and read Middlebury `.flo` files, then rate the triplet they describe.

use celforge::formats::{read_flo, write_flo};
use celforge::mining::{rrld, TripletFlows, DEFAULT_MIN_NORM};
use celforge::warp::FlowField;

fn main() -> celforge::Result<()> {
    let dir = std::env::temp_dir();
    let (prev_path, next_path) = (dir.join("mid_to_prev.flo"), dir.join("mid_to_next.flo"));

    // The middle frame sits a third of the way along, not halfway.
    write_flo(&FlowField::uniform(48, 64, -4.0, 1.0), &prev_path)?;
    write_flo(&FlowField::uniform(48, 64, 8.0, -2.0), &next_path)?;

    let flows = TripletFlows::new(read_flo(&prev_path)?, read_flo(&next_path)?)?;
    let v = rrld(&flows, DEFAULT_MIN_NORM)?;
    println!(
        "{} bytes per file",
        std::fs::metadata(&prev_path).map(|m| m.len()).unwrap_or(0)
    );
    println!(
        "rrld = {v:.6} ({})",
        if v < 0.3 { "linear enough" } else { "rejected" }
    );
    Ok(())
}
