//! Preprocess raw game inputs into a bundle directory and load it back.
//!
//! `cargo run --example preprocess_bundle -- [out_dir]`

use hoopvis::bundle::{preprocess, GameBundle};
use hoopvis::config::Config;
use hoopvis::synth::demo_game;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(std::path::PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("hoopvis-demo-bundle"));
    let inputs = demo_game(7);
    println!(
        "{} detections, {} court samples, {} masks, {} shots",
        inputs.detections.len(),
        inputs.tracking.len(),
        inputs.masks.len(),
        inputs.shots.len()
    );
    let bundle = preprocess(inputs, &Config::default())?;
    bundle.save(&out)?;
    let loaded = GameBundle::load(&out)?;
    println!(
        "{} -> {}: {} frames at {} fps, {} tracked boxes, {} EPV maps",
        loaded.meta.game_id,
        out.display(),
        loaded.frame_count(),
        loaded.frame_rate(),
        loaded.tracks.len(),
        loaded.epv_maps.len()
    );
    assert_eq!(loaded.render_frame(10, None, &loaded.config), bundle.render_frame(10, None, &bundle.config));
    Ok(())
}
