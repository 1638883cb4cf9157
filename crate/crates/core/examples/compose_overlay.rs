//! Compose one frame of the demo possession, list its render commands, and
//! check on the reference rasterizer that every player pixel survives.

use hoopvis::bundle::preprocess;
use hoopvis::config::Config;
use hoopvis::overlay::Layer;
use hoopvis::raster::rasterize;
use hoopvis::synth::{demo_game, source_frame};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bundle = preprocess(demo_game(7), &Config::default())?;
    let frame = 48;
    let composed = bundle.render_frame(frame, None, &bundle.config);
    for c in &composed.commands {
        println!(
            "{:?} {:<18} {:<3} opacity {:.2}",
            c.layer,
            c.primitive.name(),
            c.player.as_ref().map_or("", |p| p.as_str()),
            c.style.opacity
        );
    }
    for w in &composed.warnings {
        println!("warning: {w:?}");
    }

    let (w, h) = (bundle.meta.width, bundle.meta.height);
    let src = source_frame(frame, w, h);
    let mask = bundle.mask_at(frame).map(|m| m.to_bitmap()).unwrap_or_default();
    let out = rasterize(&src, &mask, &composed.commands, Layer::ForegroundRestore);
    let kept = mask.iter().enumerate().filter(|(i, &m)| m && out.pixels[*i] == src.pixels[*i]).count();
    let fg = mask.iter().filter(|&&m| m).count();
    let changed = out.pixels.iter().zip(&src.pixels).filter(|(a, b)| a != b).count();
    println!("foreground pixels intact: {kept}/{fg}; background pixels changed: {changed}");
    Ok(())
}
