//! Compares the dense, implicit and keypoint scores for candidates at
//! growing yaw offsets from the query camera. Lower is better for all of them.

use mcrefine::eval::{apply_offset, BasinAxis};
use mcrefine::features::{
    dense_distance, detect_keypoints, implicit_match_distance, match_score_exhaustive, match_score_patchwise,
    FeatureExtractor, PyramidConfig,
};
use mcrefine::geometry::Intrinsics;
use mcrefine::renderer::{render, RoomLayout, ShadingMode, SyntheticSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mcrefine::Result<()> {
    let layout = RoomLayout::generate(&SyntheticSpec::default())?;
    let intr = Intrinsics::new(100.0, 100.0, 80.0, 60.0, 160, 120)?;
    let gt = layout.sample_camera(&mut ChaCha8Rng::seed_from_u64(2), 3.0);
    let ext = PyramidConfig::default();

    let query = render(&layout.scene, &gt, &intr, ShadingMode::Textured)?.image;
    let q_feat = ext.extract_level(&query, 1)?;
    let q_kp = detect_keypoints(&query)?;
    println!("query: {} keypoints", q_kp.len());
    println!("{:>6} {:>8} {:>8} {:>10} {:>10}", "yaw", "dense", "implicit", "exhaustive", "patch:16");
    for yaw in [0.0, 1.0, 2.0, 4.0, 8.0, 16.0] {
        let cand = render(&layout.scene, &apply_offset(&gt, BasinAxis::Yaw, yaw), &intr, ShadingMode::Textured)?.image;
        let c_feat = ext.extract_level(&cand, 1)?;
        let c_kp = detect_keypoints(&cand)?;
        println!(
            "{yaw:>6.1} {:>8.4} {:>8.3} {:>10.4} {:>10.4}",
            dense_distance(&q_feat, &c_feat)?.value(),
            implicit_match_distance(&q_feat, &c_feat, 5)?.value(),
            match_score_exhaustive(&q_kp, &c_kp)?.value(),
            match_score_patchwise(&q_kp, &c_kp, 16.0)?.value(),
        );
    }
    Ok(())
}
