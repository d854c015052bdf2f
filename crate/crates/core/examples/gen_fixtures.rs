//! Regenerates the sample images used by the bundled pendant recipe.
//!
//! Usage: `cargo run -p reliefcast-core --example gen_fixtures -- <dir>`

use reliefcast_core::fixtures;
use reliefcast_core::raster::ppm;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "recipes/pendant".to_string());
    let dir = std::path::Path::new(&dir);
    std::fs::create_dir_all(dir).expect("create output dir");
    for (name, image) in [
        ("letters.ppm", fixtures::letters_image()),
        ("logo.ppm", fixtures::logo_image()),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, ppm::encode(&image)).expect("write fixture");
        println!("wrote {}", path.display());
    }
}
