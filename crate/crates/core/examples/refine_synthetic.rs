//! Refines a handful of perturbed cameras in a procedural room and prints
//! the error before and after, plus the recall summary.

use mcrefine::eval::{summarize_errors, RECALL_THRESHOLDS};
use mcrefine::features::PyramidConfig;
use mcrefine::filter::{Preset, Schedule, VERTICAL_DAMPING};
use mcrefine::geometry::{perturb_pose_exact, pose_error, Intrinsics};
use mcrefine::refiner::{Query, Refiner, Scorer};
use mcrefine::renderer::{render, RoomLayout, ShadingMode, SyntheticSpec};
use mcrefine::seed;

fn main() -> mcrefine::Result<()> {
    env_logger::init();
    let layout = RoomLayout::generate(&SyntheticSpec::default())?;
    let intr = Intrinsics::new(100.0, 100.0, 80.0, 60.0, 160, 120)?;
    let diag = layout.scene.diagonal();
    let schedule = Schedule {
        total_steps: 40,
        n1: 15,
        seed: 3,
        ..Preset::Standalone.schedule(diag)
    };
    schedule.validate()?;
    let ext = PyramidConfig::default();
    let refiner = Refiner {
        scene: &layout.scene,
        intrinsics: &intr,
        schedule: &schedule,
        scorer: Scorer::Dense,
        extractor: &ext,
        shading: ShadingMode::Textured,
    };

    let mut rng = seed::stream(3, &[]);
    let gts: Vec<_> = (0..4).map(|_| layout.sample_camera(&mut rng, 3.0)).collect();
    let inits: Vec<_> = gts
        .iter()
        .map(|g| perturb_pose_exact(g, 0.05 * diag, 15.0, VERTICAL_DAMPING, &mut rng))
        .collect();
    let queries = gts
        .iter()
        .enumerate()
        .map(|(i, g)| {
            Ok(Query {
                name: format!("view{i}"),
                image: render(&layout.scene, g, &intr, ShadingMode::Textured)?.image,
            })
        })
        .collect::<mcrefine::Result<Vec<_>>>()?;

    let results = refiner.refine_batch(&queries, &inits)?;
    let mut errors = Vec::new();
    for ((q, r), (init, gt)) in queries.iter().zip(&results).zip(inits.iter().zip(&gts)) {
        let (before, after) = (pose_error(init, gt), pose_error(&r.final_pose, gt));
        println!(
            "{}: {:.3} m / {:.2} deg -> {:.3} m / {:.2} deg in {:.1}s",
            q.name, before.trans_err, before.rot_err, after.trans_err, after.rot_err, r.wall_time
        );
        errors.push(after);
    }
    print!("{}", summarize_errors(&errors, &RECALL_THRESHOLDS)?.to_csv(&schedule.to_config_line()));
    Ok(())
}
