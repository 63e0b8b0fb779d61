//! Renders one camera of a procedural room in every shading mode.
//!
//! `cargo run --release --example render_views -- [SEED] [OUT_DIR]`

use mcrefine::geometry::Intrinsics;
use mcrefine::renderer::{render, save_image, RoomLayout, ShadingMode, SyntheticSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mcrefine::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let out = std::path::PathBuf::from(args.next().unwrap_or_else(|| "render_views".into()));
    std::fs::create_dir_all(&out).map_err(|e| mcrefine::Error::io(&out, e))?;

    let layout = RoomLayout::generate(&SyntheticSpec { seed, ..SyntheticSpec::default() })?;
    let intr = Intrinsics::new(200.0, 200.0, 160.0, 120.0, 320, 240)?;
    let pose = layout.sample_camera(&mut ChaCha8Rng::seed_from_u64(seed), 4.0);
    println!(
        "room: {} triangles, diagonal {:.2} m; camera at {:.2?}",
        layout.scene.triangles().len(),
        layout.scene.diagonal(),
        pose.center().as_slice()
    );

    for mode in ShadingMode::ALL {
        let view = render(&layout.scene, &pose, &intr, mode)?;
        let path = out.join(format!("{}.png", mode.name()));
        save_image(&view.image, &path)?;
        let hit = view.depth.iter().filter(|d| d.is_finite()).count();
        println!("{:>9}: {} ({} of {} pixels hit)", mode.name(), path.display(), hit, view.depth.len());
    }
    Ok(())
}
