//! Gaze-driven interaction state: dwell-triggered focus lifts and the
//! smoothed radial filter.
//!
//! A session is a single-writer state machine fed with time-ordered
//! [`GazeSample`]s. Queries take the current presentation time so that
//! lift expiry is exact without having to tick on every frame.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gamestate::Level;
use crate::geometry::{BoundingBox, Point};
use crate::ingest::PlayerId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GazeConfig {
    /// Seconds of dwell that lift a player.
    pub dwell_trigger: f64,
    /// Seconds a lift persists after the gaze leaves.
    pub linger: f64,
    /// Radius of the spotlight filter, pixels.
    pub filter_radius: f64,
    /// Seconds of absence after which a dwell accumulator resets.
    pub dwell_grace: f64,
    /// Fraction of the distance to the gaze point the filter center closes per second.
    pub center_smoothing: f64,
    /// Pixels added around each player box for hit testing.
    pub hitbox_margin: f64,
}

impl Default for GazeConfig {
    fn default() -> Self {
        Self {
            dwell_trigger: 0.25,
            linger: 1.8,
            filter_radius: 650.0,
            dwell_grace: 0.1,
            center_smoothing: 0.85,
            hitbox_margin: 10.0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GazeError {
    #[error("gaze timestamp {got} does not follow {last}")]
    NonMonotone { last: f64, got: f64 },
    #[error("gaze config: {0}")]
    Config(&'static str),
    #[error("gaze trace line {line}: {message}")]
    Trace { line: usize, message: String },
}

impl GazeConfig {
    pub fn validate(&self) -> Result<(), GazeError> {
        let positive = [
            self.dwell_trigger,
            self.linger,
            self.filter_radius,
            self.dwell_grace,
            self.hitbox_margin,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(GazeError::Config("durations, radius and margin must be positive"));
        }
        if !(self.center_smoothing > 0.0 && self.center_smoothing <= 1.0) {
            return Err(GazeError::Config("center_smoothing must be in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    /// Seconds on the video clock.
    pub timestamp: f64,
    /// Screen (video frame) pixels.
    pub point: Point,
    pub valid: bool,
}

impl GazeSample {
    pub fn new(timestamp: f64, x: f64, y: f64) -> Self {
        Self {
            timestamp,
            point: Point::new(x, y),
            valid: true,
        }
    }

    pub fn invalid(timestamp: f64) -> Self {
        Self {
            timestamp,
            point: Point::default(),
            valid: false,
        }
    }
}

/// Slack for accumulated durations built from float timestamps.
const TIME_EPSILON: f64 = 1e-9;

/// The player whose margin-expanded box contains `point`; overlaps go to the
/// nearest box center, then the lower player id.
pub fn hit_test<'a>(point: Point, boxes: impl IntoIterator<Item = (&'a PlayerId, &'a BoundingBox)>, margin: f64) -> Option<PlayerId> {
    let mut best: Option<(&PlayerId, f64)> = None;
    for (id, b) in boxes {
        if !b.expand(margin).contains(point) {
            continue;
        }
        let d = point.distance(b.center());
        let better = match best {
            None => true,
            Some((bid, bd)) => d < bd || (d == bd && id < bid),
        };
        if better {
            best = Some((id, d));
        }
    }
    best.map(|(id, _)| id.clone())
}

#[derive(Debug, Clone, PartialEq)]
struct Dwell {
    /// Dwell time from earlier visits bridged by the grace rule.
    carried: f64,
    /// Start of the current visit.
    since: f64,
    /// Last sample time on the player during the current visit.
    last_on: f64,
    /// Departure time while away.
    absent_since: Option<f64>,
}

impl Dwell {
    fn accumulated(&self) -> f64 {
        match self.absent_since {
            Some(_) => self.carried,
            None => self.carried + (self.last_on - self.since),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GazeSessionState {
    last_timestamp: Option<f64>,
    target: Option<PlayerId>,
    dwell: BTreeMap<PlayerId, Dwell>,
    /// Lifted players; `None` while still gazed, else the expiry time.
    lifted: BTreeMap<PlayerId, Option<f64>>,
    center: Option<Point>,
    center_time: f64,
}

impl GazeSessionState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last_timestamp(&self) -> Option<f64> {
        self.last_timestamp
    }

    pub fn target(&self) -> Option<&PlayerId> {
        self.target.as_ref()
    }

    pub fn accumulated(&self, p: &PlayerId) -> f64 {
        self.dwell.get(p).map(Dwell::accumulated).unwrap_or(0.0)
    }

    pub fn glow(&self, p: &PlayerId, cfg: &GazeConfig) -> f64 {
        (self.accumulated(p) / cfg.dwell_trigger).clamp(0.0, 1.0)
    }

    pub fn glows(&self, cfg: &GazeConfig) -> BTreeMap<PlayerId, f64> {
        self.dwell
            .keys()
            .map(|p| (p.clone(), self.glow(p, cfg)))
            .filter(|(_, g)| *g > 0.0)
            .collect()
    }

    pub fn is_lifted_at(&self, p: &PlayerId, now: f64) -> bool {
        match self.lifted.get(p) {
            Some(None) => true,
            Some(Some(expiry)) => now < *expiry,
            None => false,
        }
    }

    pub fn lifted_at(&self, now: f64) -> BTreeSet<PlayerId> {
        self.lifted
            .keys()
            .filter(|p| self.is_lifted_at(p, now))
            .cloned()
            .collect()
    }

    pub fn lift_expiry(&self, p: &PlayerId) -> Option<Option<f64>> {
        self.lifted.get(p).copied()
    }

    pub fn filter_center(&self) -> Option<Point> {
        self.center
    }

    /// Forget dwell and lifts, keeping the filter center. Used on seeks.
    pub fn reset_focus(&mut self) {
        self.last_timestamp = None;
        self.target = None;
        self.dwell.clear();
        self.lifted.clear();
    }

    fn check_time(&self, t: f64) -> Result<(), GazeError> {
        match self.last_timestamp {
            Some(last) if t <= last => Err(GazeError::NonMonotone { last, got: t }),
            _ if !t.is_finite() => Err(GazeError::NonMonotone {
                last: self.last_timestamp.unwrap_or(f64::NEG_INFINITY),
                got: t,
            }),
            _ => Ok(()),
        }
    }

    /// Drop grace-expired accumulators and elapsed lifts at time `t`.
    pub fn expire(&mut self, t: f64, cfg: &GazeConfig) {
        self.dwell
            .retain(|_, d| d.absent_since.is_none_or(|s| t - s < cfg.dwell_grace));
        self.lifted.retain(|_, e| e.is_none_or(|x| t < x));
    }

    /// Advance the focus state machine with one sample whose hit test gave `hit`.
    pub fn step_focus(&mut self, sample: &GazeSample, hit: Option<&PlayerId>, cfg: &GazeConfig) -> Result<(), GazeError> {
        let t = sample.timestamp;
        self.check_time(t)?;
        let hit = if sample.valid { hit } else { None };
        self.expire(t, cfg);

        if self.target.as_ref() != hit {
            if let Some(prev) = self.target.take() {
                if let Some(d) = self.dwell.get_mut(&prev) {
                    d.carried += d.last_on - d.since;
                    d.absent_since = Some(t);
                }
                if let Some(e) = self.lifted.get_mut(&prev) {
                    if e.is_none() {
                        *e = Some(t + cfg.linger);
                    }
                }
            }
            if let Some(p) = hit {
                self.dwell
                    .entry(p.clone())
                    .and_modify(|d| {
                        d.since = t;
                        d.last_on = t;
                        d.absent_since = None;
                    })
                    .or_insert(Dwell {
                        carried: 0.0,
                        since: t,
                        last_on: t,
                        absent_since: None,
                    });
                if let Some(e) = self.lifted.get_mut(p) {
                    *e = None;
                }
            }
            self.target = hit.cloned();
        } else if let Some(p) = hit {
            if let Some(d) = self.dwell.get_mut(p) {
                d.last_on = t;
            }
        }

        if let Some(p) = hit {
            if self.accumulated(p) + TIME_EPSILON >= cfg.dwell_trigger {
                self.lifted.insert(p.clone(), None);
            }
        }
        self.last_timestamp = Some(t);
        Ok(())
    }

    /// Move the filter center toward a valid sample by exponential smoothing.
    pub fn step_filter(&mut self, sample: &GazeSample, cfg: &GazeConfig) {
        if !sample.valid {
            return;
        }
        match self.center {
            None => self.center = Some(sample.point),
            Some(c) => {
                let dt = (sample.timestamp - self.center_time).max(0.0);
                let alpha = smoothing_fraction(cfg.center_smoothing, dt);
                self.center = Some(Point::new(
                    c.x + alpha * (sample.point.x - c.x),
                    c.y + alpha * (sample.point.y - c.y),
                ));
            }
        }
        self.center_time = sample.timestamp;
    }

    /// Hit test, focus and filter in one step.
    pub fn submit<'a>(
        &mut self,
        sample: &GazeSample,
        boxes: impl IntoIterator<Item = (&'a PlayerId, &'a BoundingBox)>,
        cfg: &GazeConfig,
    ) -> Result<Option<PlayerId>, GazeError> {
        let hit = if sample.valid {
            hit_test(sample.point, boxes, cfg.hitbox_margin)
        } else {
            None
        };
        self.step_focus(sample, hit.as_ref(), cfg)?;
        self.step_filter(sample, cfg);
        Ok(hit)
    }
}

/// Fraction of the remaining distance closed after `dt` seconds.
pub fn smoothing_fraction(per_second: f64, dt: f64) -> f64 {
    1.0 - libm::pow(1.0 - per_second, dt)
}

/// Darken everything outside this disk (audience only; the viewer masks players and court).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarkenRegion {
    pub center: Point,
    pub radius: f64,
}

/// Snapshot of gaze effects for one frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GazeOutput {
    pub levels: BTreeMap<PlayerId, Level>,
    /// Open players whose spotlight stays on.
    pub spotlight_on: BTreeSet<PlayerId>,
    pub darken: Option<DarkenRegion>,
    pub glow: BTreeMap<PlayerId, f64>,
}

/// Apply lifts and the spotlight filter on top of the game-state levels.
pub fn apply_gaze(
    importance: &BTreeMap<PlayerId, Level>,
    state: &GazeSessionState,
    now: f64,
    spotlight_anchors: &BTreeMap<PlayerId, Point>,
    cfg: &GazeConfig,
) -> GazeOutput {
    let mut levels = importance.clone();
    for p in state.lifted_at(now) {
        let level = levels.entry(p).or_insert(Level::Lv1);
        if *level < Level::Lifted {
            *level = Level::Lifted;
        }
    }
    let center = state.filter_center();
    let spotlight_on = spotlight_anchors
        .iter()
        .filter(|(_, a)| center.is_none_or(|c| c.distance(**a) <= cfg.filter_radius))
        .map(|(p, _)| p.clone())
        .collect();
    GazeOutput {
        levels,
        spotlight_on,
        darken: center.map(|center| DarkenRegion {
            center,
            radius: cfg.filter_radius,
        }),
        glow: state.glows(cfg),
    }
}

pub fn parse_gaze_trace(text: &str) -> Result<Vec<GazeSample>, GazeError> {
    let mut out: Vec<GazeSample> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: String| GazeError::Trace { line: i + 1, message: m };
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(err("expected timestamp,x,y,valid".into()));
        }
        let num = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| err(format!("bad number {s:?}")));
        let valid = match f[3] {
            "1" => true,
            "0" => false,
            other => return Err(err(format!("valid must be 0 or 1, got {other:?}"))),
        };
        let s = GazeSample {
            timestamp: num(f[0])?,
            point: Point::new(num(f[1])?, num(f[2])?),
            valid,
        };
        if let Some(prev) = out.last() {
            if s.timestamp <= prev.timestamp {
                return Err(err("timestamps must be strictly increasing".into()));
            }
        }
        out.push(s);
    }
    Ok(out)
}

pub fn load_gaze_trace(path: impl AsRef<Path>) -> Result<Vec<GazeSample>, GazeError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| GazeError::Trace {
        line: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    parse_gaze_trace(&text)
}

pub fn write_gaze_trace(samples: &[GazeSample]) -> String {
    let mut s = String::new();
    for g in samples {
        let _ = writeln!(s, "{},{},{},{}", g.timestamp, g.point.x, g.point.y, g.valid as u8);
    }
    s
}
