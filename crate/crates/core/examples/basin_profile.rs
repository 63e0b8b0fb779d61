//! Prints the dense score along yaw around a reference camera, per pyramid level.
//!
//! Coarse levels should give a wide, smooth basin; fine levels a narrow, sharp one.

use mcrefine::eval::{basin_profile, BasinAxis};
use mcrefine::features::PyramidConfig;
use mcrefine::geometry::Intrinsics;
use mcrefine::renderer::{RoomLayout, ShadingMode, SyntheticSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mcrefine::Result<()> {
    let layout = RoomLayout::generate(&SyntheticSpec::default())?;
    let intr = Intrinsics::new(100.0, 100.0, 80.0, 60.0, 160, 120)?;
    let gt = layout.sample_camera(&mut ChaCha8Rng::seed_from_u64(0), 5.0);
    let profile = basin_profile(
        &layout.scene,
        &gt,
        &intr,
        BasinAxis::Yaw,
        30.0,
        21,
        &PyramidConfig::default(),
        ShadingMode::Textured,
    )?;

    print!("{:>8}", "yaw");
    for l in 1..=profile.num_levels() {
        print!("  level {l}");
    }
    println!();
    for (i, o) in profile.offsets.iter().enumerate() {
        print!("{o:>8.1}");
        for l in 1..=profile.num_levels() {
            print!("{:>9.4}", profile.level_scores(l)?[i]);
        }
        println!();
    }
    for l in 1..=profile.num_levels() {
        println!(
            "level {l}: argmin {:+.1} deg, slope at +3 deg {:.4}/deg",
            profile.argmin(l)?,
            profile.slope_at(l, 3.0)?
        );
    }
    Ok(())
}
