//! Scores a textured query against candidates rendered in each shading mode
//! and reports how well each mode preserves the textured ranking.

use mcrefine::eval::{domain_shift_profile, BasinAxis};
use mcrefine::features::{FeatureExtractor, PyramidConfig};
use mcrefine::geometry::Intrinsics;
use mcrefine::renderer::{RoomLayout, ShadingMode, SyntheticSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mcrefine::Result<()> {
    let layout = RoomLayout::generate(&SyntheticSpec::default())?;
    let intr = Intrinsics::new(100.0, 100.0, 80.0, 60.0, 160, 120)?;
    let gt = layout.sample_camera(&mut ChaCha8Rng::seed_from_u64(0), 5.0);
    let ext = PyramidConfig::default();
    let report = domain_shift_profile(&layout.scene, &gt, &intr, BasinAxis::Yaw, 30.0, 21, &ext)?;

    for mode in ShadingMode::ALL {
        let profile = report.profile(mode).expect("every mode is profiled");
        let rhos: Vec<String> = (1..=ext.num_levels())
            .map(|l| format!("{:.3}", report.correlation(mode, l).unwrap_or(f64::NAN)))
            .collect();
        let coarse = profile.level_scores(ext.num_levels())?;
        println!(
            "{:>9}: spearman vs textured per level [{}], coarse score at 0 = {:.4}",
            mode.name(),
            rhos.join(", "),
            coarse[coarse.len() / 2]
        );
    }
    print!("{}", report.level_csv(ext.num_levels(), "yaw profile at the coarsest level")?);
    Ok(())
}
