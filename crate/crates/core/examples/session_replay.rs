//! Drive a viewer session with the demo gaze trace the way the server does,
//! and check it matches the offline replay byte for byte.

use std::sync::Arc;

use hoopvis::bundle::preprocess;
use hoopvis::config::Config;
use hoopvis::replay::{dump, replay};
use hoopvis::session::Session;
use hoopvis::synth::{demo_game, demo_gaze_trace, DEMO_FILTER_RADIUS};
use hoopvis::wire::{encode_frame, ControlOp};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = Config::default();
    cfg.gaze.filter_radius = DEMO_FILTER_RADIUS;
    let bundle = Arc::new(preprocess(demo_game(7), &cfg)?);
    let trace = demo_gaze_trace();

    let offline = dump(&replay(&bundle, &trace, &bundle.config)?);

    let mut session = Session::new(bundle.clone(), "")?;
    session.control(ControlOp::Play)?;
    let mut online = Vec::new();
    let mut samples = trace.iter().peekable();
    while let Some(frame) = {
        // the client sends what it has seen up to the frame about to be shown
        let now = bundle.frame_time(session.playhead());
        while let Some(s) = samples.next_if(|s| s.timestamp <= now) {
            session.submit_gaze(*s)?;
        }
        session.tick()
    } {
        online.extend(encode_frame(frame.frame, &frame.commands));
    }
    println!("offline {} bytes, online {} bytes, identical: {}", offline.len(), online.len(), offline == online);
    let lifted = session.gaze_state().lifted_at(bundle.frame_time(bundle.frame_count() - 1));
    println!("lifted at the end: {lifted:?}");
    Ok(())
}
