//! The gaze state machine on a hand-written trace: dwell lifts a player,
//! the lift lingers after the eyes leave, and a blink counts as looking away.

use std::collections::BTreeMap;

use hoopvis::gaze::{GazeConfig, GazeSample, GazeSessionState};
use hoopvis::geometry::BoundingBox;
use hoopvis::ingest::PlayerId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GazeConfig::default();
    let boxes = BTreeMap::from([
        (PlayerId::new("A"), BoundingBox::new(100.0, 100.0, 40.0, 100.0)),
        (PlayerId::new("B"), BoundingBox::new(600.0, 100.0, 40.0, 100.0)),
    ]);
    let a = PlayerId::new("A");
    let mut state = GazeSessionState::new();
    let mut trace = Vec::new();
    for k in 0..120 {
        let t = k as f64 / 30.0;
        trace.push(match k {
            0..12 => GazeSample::new(t, 120.0, 150.0),
            12..14 => GazeSample::invalid(t),
            14..24 => GazeSample::new(t, 120.0, 150.0),
            _ => GazeSample::new(t, 620.0, 150.0),
        });
    }
    let mut was = false;
    for s in &trace {
        state.submit(s, boxes.iter(), &cfg)?;
        let lifted = state.is_lifted_at(&a, s.timestamp);
        if lifted != was || s.timestamp == 0.0 {
            println!(
                "t={:.3}s  A lifted={lifted}  dwell={:.3}s  glow={:.2}",
                s.timestamp,
                state.accumulated(&a),
                state.glow(&a, &cfg)
            );
            was = lifted;
        }
    }
    println!("filter center now at {:?}", state.filter_center());
    Ok(())
}
