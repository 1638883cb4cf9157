//! Offline replay of a gaze trace over a bundle.

use crate::bundle::GameBundle;
use crate::config::Config;
use crate::gaze::{GazeError, GazeSample, GazeSessionState};
use crate::overlay::ComposedFrame;
use crate::session::apply_sample;
use crate::wire::encode_frame;

/// Compose every frame, applying each sample before the first frame whose
/// presentation time is at or after it.
pub fn replay(bundle: &GameBundle, trace: &[GazeSample], cfg: &Config) -> Result<Vec<ComposedFrame>, GazeError> {
    let mut gaze = GazeSessionState::new();
    let mut next = 0;
    let mut out = Vec::with_capacity(bundle.frame_count() as usize);
    for f in 0..bundle.frame_count() {
        let now = bundle.frame_time(f);
        while let Some(s) = trace.get(next).filter(|s| s.timestamp <= now) {
            apply_sample(bundle, &mut gaze, s, cfg)?;
            next += 1;
        }
        out.push(bundle.render_frame(f, Some(&gaze), cfg));
    }
    Ok(out)
}

/// Frames as consecutive wire messages.
pub fn dump(frames: &[ComposedFrame]) -> Vec<u8> {
    frames.iter().flat_map(|f| encode_frame(f.frame, &f.commands)).collect()
}
