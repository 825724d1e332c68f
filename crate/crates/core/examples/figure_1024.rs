//! 1024 random points and their hood as an SVG.
//!
//!     cargo run --release --example figure_1024 -- hood.svg

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wagener_hull::build_hood;
use wagener_hull::cli::svg::emit_svg;
use wagener_hull::instances::uniform_points;

fn main() {
    let path = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("hood_1024.svg"), PathBuf::from);
    let ps = uniform_points(1024, &mut ChaCha8Rng::seed_from_u64(1024));
    let hood = build_hood(&ps, None).expect("kernel run");
    emit_svg(ps.points(), &hood, &path).expect("write svg");
    println!("{} corners -> {}", hood.len(), path.display());
}
