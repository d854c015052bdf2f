//! The committed sample images must stay in sync with their generators,
//! and the bundled recipe must stay loadable.

use std::path::PathBuf;

use reliefcast_core::config::PipelineConfig;
use reliefcast_core::fixtures;
use reliefcast_core::raster::ppm;

fn recipe_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../recipes/pendant")
}

#[test]
fn committed_images_match_the_generators() {
    for (file, image) in [
        ("letters.ppm", fixtures::letters_image()),
        ("logo.ppm", fixtures::logo_image()),
    ] {
        let path = recipe_dir().join(file);
        let committed = std::fs::read(&path)
            .unwrap_or_else(|e| panic!("{} missing ({e}); run the gen_fixtures example", file));
        assert_eq!(
            committed,
            ppm::encode(&image),
            "{file} differs from its generator; rerun gen_fixtures"
        );
    }
}

#[test]
fn bundled_recipe_loads_and_names_four_layers() {
    let (config, _) = PipelineConfig::load(&recipe_dir().join("pendant.toml")).unwrap();
    let names: Vec<&str> = config.layers.iter().map(|l| l.name()).collect();
    assert_eq!(names, ["letters", "ring", "middle", "top"]);
    assert_eq!(config.target_diameter_mm, Some(50.0));
    assert!(config.clip.is_some());
}
