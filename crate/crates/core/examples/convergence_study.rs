//! A small convergence grid: median final error for each pair of initial
//! translation and rotation offsets.

use mcrefine::eval::convergence_study;
use mcrefine::features::PyramidConfig;
use mcrefine::filter::{Preset, Schedule};
use mcrefine::geometry::Intrinsics;
use mcrefine::refiner::{Refiner, Scorer};
use mcrefine::renderer::{RoomLayout, ShadingMode, SyntheticSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mcrefine::Result<()> {
    let layout = RoomLayout::generate(&SyntheticSpec::default())?;
    let intr = Intrinsics::new(100.0, 100.0, 80.0, 60.0, 160, 120)?;
    let schedule = Schedule {
        total_steps: 20,
        n1: 8,
        fine_tail: 4,
        resample_interval: 10,
        candidates_start: 30,
        candidates_end: 15,
        ..Preset::Standalone.schedule(layout.scene.diagonal())
    };
    let ext = PyramidConfig::default();
    let refiner = Refiner {
        scene: &layout.scene,
        intrinsics: &intr,
        schedule: &schedule,
        scorer: Scorer::Dense,
        extractor: &ext,
        shading: ShadingMode::Textured,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let gts: Vec<_> = (0..2).map(|_| layout.sample_camera(&mut rng, 3.0)).collect();

    let m = convergence_study(&refiner, &gts, &[0.1, 0.4], &[2.0, 8.0], 2)?;
    print!("{}", m.to_csv(&schedule.to_config_line()));
    Ok(())
}
