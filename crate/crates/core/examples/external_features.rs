//! Round-trips precomputed features through a feature directory, the way an
//! external network would hand its pyramids to the refiner.

use mcrefine::features::{dense_score, save_pyramid, ExternalFeatures, FeatureExtractor, PyramidConfig};
use mcrefine::geometry::Intrinsics;
use mcrefine::renderer::{render, RoomLayout, ShadingMode, SyntheticSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mcrefine::Result<()> {
    let dir = std::env::temp_dir().join("mcrefine_external_features");
    std::fs::create_dir_all(&dir).map_err(|e| mcrefine::Error::io(&dir, e))?;

    let layout = RoomLayout::generate(&SyntheticSpec::default())?;
    let intr = Intrinsics::new(100.0, 100.0, 80.0, 60.0, 160, 120)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let views = (0..3)
        .map(|_| Ok(render(&layout.scene, &layout.sample_camera(&mut rng, 3.0), &intr, ShadingMode::Textured)?.image))
        .collect::<mcrefine::Result<Vec<_>>>()?;

    // stand-in for the external network: any extractor producing a pyramid works
    let builtin = PyramidConfig::default();
    for v in &views {
        let pyr = builtin.extract(v)?;
        let path = dir.join(format!("{}.fpyr", mcrefine::features::image_digest(v)));
        save_pyramid(&pyr, &path)?;
        println!("wrote {}", path.display());
    }

    let external = ExternalFeatures::open(&dir)?;
    println!("{}", external.describe());
    let a = external.extract(&views[0])?;
    for (i, v) in views.iter().enumerate() {
        let b = external.extract(v)?;
        let reference = dense_score(&builtin.extract(&views[0])?, &builtin.extract(v)?, 1)?;
        println!(
            "view 0 vs view {i}: external {:.5}, builtin {:.5}",
            dense_score(&a, &b, 1)?.value(),
            reference.value()
        );
    }
    let unseen = render(&layout.scene, &layout.sample_camera(&mut rng, 3.0), &intr, ShadingMode::Textured)?.image;
    match external.extract(&unseen) {
        Ok(_) => println!("unexpected hit for an unseen image"),
        Err(e) => println!("unseen image: {e}"),
    }
    Ok(())
}
