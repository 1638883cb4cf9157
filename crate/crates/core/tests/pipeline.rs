use std::sync::Arc;

use hoopvis::bundle::{preprocess, GameBundle};
use hoopvis::config::Config;
use hoopvis::gaze::GazeSample;
use hoopvis::replay::{dump, replay};
use hoopvis::session::{GazeAck, PlayState, Session, SessionError};
use hoopvis::synth;
use hoopvis::wire::ControlOp;

fn demo_config() -> Config {
    let mut cfg = Config::default();
    cfg.gaze.filter_radius = synth::DEMO_FILTER_RADIUS;
    cfg
}

fn demo_bundle() -> Arc<GameBundle> {
    let dir = tempfile::tempdir().unwrap();
    let built = preprocess(synth::demo_game(7), &demo_config()).unwrap();
    built.save(dir.path()).unwrap();
    Arc::new(GameBundle::load(dir.path()).unwrap())
}

fn play_through(session: &mut Session, trace: &[GazeSample]) -> Vec<hoopvis::overlay::ComposedFrame> {
    session.control(ControlOp::Play).unwrap();
    let mut out = Vec::new();
    let mut next = 0;
    while session.play_state() == PlayState::Playing {
        // the client sends samples up to the frame it is showing
        let now = session.bundle().frame_time(session.playhead());
        while next < trace.len() && trace[next].timestamp <= now {
            session.submit_gaze(trace[next]).unwrap();
            next += 1;
        }
        out.extend(session.tick());
    }
    out
}

#[test]
fn saved_bundle_renders_like_the_built_one() {
    let cfg = demo_config();
    let built = preprocess(synth::demo_game(7), &cfg).unwrap();
    let loaded = demo_bundle();
    assert_eq!(loaded.frame_count(), built.frame_count());
    assert_eq!(loaded.states, built.states);
    for f in 0..built.frame_count() {
        assert_eq!(loaded.render_frame(f, None, &cfg), built.render_frame(f, None, &cfg), "frame {f}");
    }
}

#[test]
fn session_without_gaze_equals_offline_compose() {
    let bundle = demo_bundle();
    let mut s = Session::new(bundle.clone(), "").unwrap();
    let streamed = play_through(&mut s, &[]);
    assert_eq!(streamed.len(), bundle.frame_count() as usize);
    for (f, frame) in streamed.iter().enumerate() {
        assert_eq!(frame, &bundle.render_frame(f as u32, None, &bundle.config));
    }
}

#[test]
fn session_with_trace_equals_offline_replay() {
    let bundle = demo_bundle();
    let trace = synth::demo_gaze_trace();
    let offline = replay(&bundle, &trace, &bundle.config).unwrap();
    let mut s = Session::new(bundle.clone(), "").unwrap();
    let online = play_through(&mut s, &trace);
    assert_eq!(dump(&online), dump(&offline));
    // the trace does change the output
    let plain = replay(&bundle, &[], &bundle.config).unwrap();
    assert_ne!(dump(&plain), dump(&offline));
}

#[test]
fn samples_submitted_early_apply_at_presentation_time() {
    let bundle = demo_bundle();
    let trace = synth::demo_gaze_trace();
    let offline = replay(&bundle, &trace, &bundle.config).unwrap();
    let mut s = Session::new(bundle.clone(), "").unwrap();
    s.control(ControlOp::Play).unwrap();
    for g in &trace {
        s.submit_gaze(*g).unwrap();
    }
    let mut online = Vec::new();
    while let Some(f) = s.tick() {
        online.push(f);
    }
    assert_eq!(online, offline);
}

#[test]
fn pause_does_not_advance_dwell() {
    let bundle = demo_bundle();
    let mut s = Session::new(bundle.clone(), "").unwrap();
    let h3 = hoopvis::ingest::PlayerId::from("H3");
    let at = |f: u32| bundle.boxes_at(f)[&h3].center();
    s.control(ControlOp::Play).unwrap();
    for f in 0..4 {
        let t = bundle.frame_time(f);
        s.submit_gaze(GazeSample::new(t, at(f).x, at(f).y)).unwrap();
        s.tick();
    }
    let before = s.gaze_state().accumulated(&h3);
    s.control(ControlOp::Pause).unwrap();
    // five seconds of wall time at 30 Hz while paused; the video clock is stopped
    for k in 0..150 {
        let ack = s.submit_gaze(GazeSample::new(bundle.frame_time(4) + k as f64 * 1e-6, at(4).x, at(4).y)).unwrap();
        assert_eq!(ack, GazeAck::DroppedWhilePaused);
        assert!(s.tick().is_none());
    }
    assert_eq!(s.gaze_state().accumulated(&h3), before);
    assert!(!s.gaze_state().is_lifted_at(&h3, bundle.frame_time(4)));
    s.control(ControlOp::Play).unwrap();
    s.submit_gaze(GazeSample::new(bundle.frame_time(4), at(4).x, at(4).y)).unwrap();
    s.tick();
    assert!((s.gaze_state().accumulated(&h3) - (before + 1.0 / 30.0)).abs() < 1e-9);
}

#[test]
fn seek_resets_and_validates() {
    let bundle = demo_bundle();
    let trace = synth::demo_gaze_trace();
    let mut s = Session::new(bundle.clone(), "").unwrap();
    play_through(&mut s, &trace);
    assert!(s.gaze_state().last_timestamp().is_some());
    assert_eq!(
        s.control(ControlOp::Seek(bundle.frame_count())),
        Err(SessionError::SeekOutOfRange {
            frame: bundle.frame_count(),
            frame_count: bundle.frame_count()
        })
    );
    s.control(ControlOp::Seek(10)).unwrap();
    assert_eq!(s.playhead(), 10);
    assert!(s.gaze_state().last_timestamp().is_none());
    assert!(s.gaze_state().lifted_at(0.0).is_empty());
    // earlier timestamps are fine after a seek back
    s.control(ControlOp::Play).unwrap();
    s.submit_gaze(GazeSample::new(0.35, 10.0, 10.0)).unwrap();
}

#[test]
fn non_monotone_gaze_rejected_with_code() {
    let bundle = demo_bundle();
    let mut s = Session::new(bundle, "").unwrap();
    s.control(ControlOp::Play).unwrap();
    s.submit_gaze(GazeSample::new(0.5, 1.0, 1.0)).unwrap();
    let err = s.submit_gaze(GazeSample::new(0.4, 1.0, 1.0)).unwrap_err();
    assert_eq!(err.code(), hoopvis::wire::ErrorCode::NonMonotoneGaze);
}

#[test]
fn overrides_apply_per_session() {
    let bundle = demo_bundle();
    let s = Session::new(bundle.clone(), "[gaze]\nlinger = 3.0\n").unwrap();
    assert_eq!(s.config().gaze.linger, 3.0);
    assert_eq!(bundle.config.gaze.linger, 1.8);
    assert!(matches!(Session::new(bundle, "[gaze]\nlinger = -3.0\n"), Err(SessionError::Config(_))));
}
