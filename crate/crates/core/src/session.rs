//! Viewer sessions as a sans-io state machine on a virtual clock.
//!
//! A transport feeds control and gaze messages and calls [`Session::tick`]
//! once per frame period; time itself is `frame / frame_rate`, never the wall
//! clock, so a session replays identically however fast it is driven.

use std::collections::VecDeque;
use std::sync::Arc;

use thiserror::Error;

use crate::bundle::GameBundle;
use crate::config::{Config, ConfigFileError};
use crate::gaze::{GazeError, GazeSample, GazeSessionState};
use crate::ingest::FrameIndex;
use crate::overlay::ComposedFrame;
use crate::wire::{ControlOp, ErrorCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlayState {
    Playing,
    Paused,
}

#[derive(Debug, Error, PartialEq)]
pub enum SessionError {
    #[error("gaze timestamp {got} does not follow {last}")]
    NonMonotone { last: f64, got: f64 },
    #[error("seek to frame {frame} outside 0..{frame_count}")]
    SeekOutOfRange { frame: FrameIndex, frame_count: u32 },
    #[error("config overrides: {0}")]
    Config(String),
}

impl SessionError {
    pub fn code(&self) -> ErrorCode {
        match self {
            SessionError::NonMonotone { .. } => ErrorCode::NonMonotoneGaze,
            SessionError::SeekOutOfRange { .. } => ErrorCode::SeekOutOfRange,
            SessionError::Config(_) => ErrorCode::BadConfig,
        }
    }
}

impl From<ConfigFileError> for SessionError {
    fn from(e: ConfigFileError) -> Self {
        SessionError::Config(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GazeAck {
    Queued,
    /// Received while paused; the video clock is stopped so the sample is ignored.
    DroppedWhilePaused,
}

/// Frame whose boxes a gaze sample at `t` is tested against.
pub fn frame_for_time(bundle: &GameBundle, t: f64) -> FrameIndex {
    let last = bundle.frame_count().saturating_sub(1);
    let f = (t * bundle.frame_rate() + 1e-9).floor();
    if f <= 0.0 {
        0
    } else {
        (f as u64).min(last as u64) as FrameIndex
    }
}

/// Hit test a sample against the boxes shown at its time and advance the gaze state.
pub fn apply_sample(bundle: &GameBundle, gaze: &mut GazeSessionState, sample: &GazeSample, cfg: &Config) -> Result<(), GazeError> {
    let boxes = bundle.boxes_at(frame_for_time(bundle, sample.timestamp));
    gaze.submit(sample, boxes.iter(), &cfg.gaze)?;
    Ok(())
}

#[derive(Debug)]
pub struct Session {
    bundle: Arc<GameBundle>,
    config: Config,
    playhead: FrameIndex,
    play_state: PlayState,
    gaze: GazeSessionState,
    pending: VecDeque<GazeSample>,
    last_submitted: Option<f64>,
}

impl Session {
    /// A paused session at frame 0. `overrides` is a partial TOML config
    /// layered over the bundle's own.
    pub fn new(bundle: Arc<GameBundle>, overrides: &str) -> Result<Self, SessionError> {
        let config = bundle.config.with_overrides(overrides)?;
        Ok(Self {
            bundle,
            config,
            playhead: 0,
            play_state: PlayState::Paused,
            gaze: GazeSessionState::new(),
            pending: VecDeque::new(),
            last_submitted: None,
        })
    }

    pub fn bundle(&self) -> &GameBundle {
        &self.bundle
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn playhead(&self) -> FrameIndex {
        self.playhead
    }

    pub fn play_state(&self) -> PlayState {
        self.play_state
    }

    pub fn gaze_state(&self) -> &GazeSessionState {
        &self.gaze
    }

    pub fn submit_gaze(&mut self, sample: GazeSample) -> Result<GazeAck, SessionError> {
        if self.play_state == PlayState::Paused {
            return Ok(GazeAck::DroppedWhilePaused);
        }
        if let Some(last) = self.last_submitted {
            if sample.timestamp.partial_cmp(&last) != Some(std::cmp::Ordering::Greater) {
                return Err(SessionError::NonMonotone {
                    last,
                    got: sample.timestamp,
                });
            }
        }
        self.last_submitted = Some(sample.timestamp);
        self.pending.push_back(sample);
        Ok(GazeAck::Queued)
    }

    pub fn control(&mut self, op: ControlOp) -> Result<PlayState, SessionError> {
        match op {
            ControlOp::Play => self.play_state = PlayState::Playing,
            ControlOp::Pause => self.play_state = PlayState::Paused,
            ControlOp::Seek(frame) => {
                let frame_count = self.bundle.frame_count();
                if frame >= frame_count {
                    return Err(SessionError::SeekOutOfRange { frame, frame_count });
                }
                self.playhead = frame;
                self.gaze.reset_focus();
                self.pending.clear();
                self.last_submitted = None;
            }
        }
        Ok(self.play_state)
    }

    /// Apply queued samples up to the frame's presentation time, then compose it.
    pub fn render(&mut self, frame: FrameIndex) -> ComposedFrame {
        let now = self.bundle.frame_time(frame);
        while self.pending.front().is_some_and(|s| s.timestamp <= now) {
            let s = self.pending.pop_front().expect("front exists");
            // monotonicity was checked on submit
            let _ = apply_sample(&self.bundle, &mut self.gaze, &s, &self.config);
        }
        self.bundle.render_frame(frame, Some(&self.gaze), &self.config)
    }

    /// One frame period. While playing, returns the frame at the playhead and
    /// advances it; pauses after the last frame.
    pub fn tick(&mut self) -> Option<ComposedFrame> {
        if self.play_state == PlayState::Paused {
            return None;
        }
        let frame = self.render(self.playhead);
        if self.playhead + 1 < self.bundle.frame_count() {
            self.playhead += 1;
        } else {
            self.play_state = PlayState::Paused;
        }
        Some(frame)
    }
}
