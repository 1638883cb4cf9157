//! Detection post-processing: confidence clustering, two-stage association
//! against Kalman-predicted trackers, gap interpolation, and smoothing.

pub mod kalman;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{iou, BoundingBox};
use crate::ingest::{Detection, FrameIndex, PlayerId};
pub use kalman::{KalmanBoxFilter, KalmanNoise};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Assignment {
    /// Each box takes the free tracker with the largest IoU, in confidence order.
    #[default]
    Greedy,
    /// Maximum total IoU assignment per stage.
    Hungarian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatcherConfig {
    pub t_high: f64,
    pub t_low: f64,
    pub iou_match_min: f64,
    /// Frames a tracker survives unmatched; also the largest gap interpolated.
    pub max_gap: u32,
    pub smooth_window: u32,
    pub assignment: Assignment,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        Self {
            t_high: 0.6,
            t_low: 0.1,
            iou_match_min: 0.3,
            max_gap: 4,
            smooth_window: 5,
            assignment: Assignment::Greedy,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("thresholds must satisfy 0 <= t_low < t_high <= 1 (got t_low={t_low}, t_high={t_high})")]
    Thresholds { t_low: f64, t_high: f64 },
    #[error("iou_match_min must be in (0,1), got {0}")]
    IouMatch(f64),
    #[error("smooth_window must be at least 1")]
    SmoothWindow,
}

impl MatcherConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0 <= self.t_low && self.t_low < self.t_high && self.t_high <= 1.0) {
            return Err(ConfigError::Thresholds {
                t_low: self.t_low,
                t_high: self.t_high,
            });
        }
        if !(self.iou_match_min > 0.0 && self.iou_match_min < 1.0) {
            return Err(ConfigError::IouMatch(self.iou_match_min));
        }
        if self.smooth_window == 0 {
            return Err(ConfigError::SmoothWindow);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxSource {
    Detected,
    Interpolated,
}

impl BoxSource {
    pub fn name(self) -> &'static str {
        match self {
            BoxSource::Detected => "detected",
            BoxSource::Interpolated => "interpolated",
        }
    }
}

/// Identity-labelled box at one frame. The confidence is carried for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedBox {
    pub frame: FrameIndex,
    pub identity: PlayerId,
    pub bbox: BoundingBox,
    pub source: BoxSource,
    pub confidence: f64,
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Clusters<'a> {
    pub high: Vec<&'a Detection>,
    pub low: Vec<&'a Detection>,
    pub rejected: Vec<&'a Detection>,
}

/// Split one frame's detections by confidence.
///
/// High is `score > t_high`, low is `t_low < score <= t_high`, the rest is rejected.
pub fn cluster_detections<'a>(dets: &'a [Detection], cfg: &MatcherConfig) -> Clusters<'a> {
    let mut c = Clusters::default();
    for d in dets {
        if d.confidence > cfg.t_high {
            c.high.push(d);
        } else if d.confidence > cfg.t_low {
            c.low.push(d);
        } else {
            c.rejected.push(d);
        }
    }
    c
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerState {
    pub track_id: u64,
    pub identity: PlayerId,
    pub filter: KalmanBoxFilter,
    pub last_updated: FrameIndex,
    pub hits: u32,
}

impl TrackerState {
    pub fn predicted_box(&self) -> BoundingBox {
        self.filter.current_box()
    }
}

/// Owns the live trackers across frames.
#[derive(Debug, Clone)]
pub struct Tracker {
    cfg: MatcherConfig,
    noise: KalmanNoise,
    trackers: Vec<TrackerState>,
    next_id: u64,
    frame: Option<FrameIndex>,
}

/// Result of associating one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAssociation {
    pub boxes: Vec<TrackedBox>,
    pub spawned: Vec<u64>,
}

fn order_by_confidence(dets: &mut [&Detection]) {
    dets.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then_with(|| a.identity.cmp(&b.identity))
    });
}

/// Pairs of (detection index, tracker index) matched under `cfg`.
fn match_stage(
    dets: &[&Detection],
    trackers: &[TrackerState],
    free: &mut [bool],
    cfg: &MatcherConfig,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    match cfg.assignment {
        Assignment::Greedy => {
            for (di, d) in dets.iter().enumerate() {
                let mut best: Option<(usize, f64)> = None;
                for (ti, t) in trackers.iter().enumerate() {
                    if !free[ti] {
                        continue;
                    }
                    let score = iou(&d.bbox, &t.predicted_box());
                    // strict `>` keeps the lowest track id on ties
                    if best.is_none_or(|(_, s)| score > s) {
                        best = Some((ti, score));
                    }
                }
                if let Some((ti, score)) = best {
                    if score >= cfg.iou_match_min {
                        free[ti] = false;
                        pairs.push((di, ti));
                    }
                }
            }
        }
        Assignment::Hungarian => {
            let free_idx: Vec<usize> = (0..trackers.len()).filter(|&i| free[i]).collect();
            if dets.is_empty() || free_idx.is_empty() {
                return pairs;
            }
            // Integer weights; pairs below the gate weigh zero and are discarded afterwards.
            let scale = 1e9;
            let transpose = dets.len() > free_idx.len();
            let (rows, cols) = if transpose {
                (free_idx.len(), dets.len())
            } else {
                (dets.len(), free_idx.len())
            };
            let mut weights = pathfinding::matrix::Matrix::new(rows, cols, 0i64);
            for (di, d) in dets.iter().enumerate() {
                for (fi, &ti) in free_idx.iter().enumerate() {
                    let s = iou(&d.bbox, &trackers[ti].predicted_box());
                    let w = if s >= cfg.iou_match_min { (s * scale).round() as i64 } else { 0 };
                    if transpose {
                        weights[(fi, di)] = w;
                    } else {
                        weights[(di, fi)] = w;
                    }
                }
            }
            let (_, assignment) = pathfinding::kuhn_munkres::kuhn_munkres(&weights);
            for (r, &c) in assignment.iter().enumerate() {
                let (di, fi) = if transpose { (c, r) } else { (r, c) };
                let ti = free_idx[fi];
                if iou(&dets[di].bbox, &trackers[ti].predicted_box()) >= cfg.iou_match_min {
                    pairs.push((di, ti));
                }
            }
            for &(_, ti) in &pairs {
                free[ti] = false;
            }
            pairs.sort_unstable();
        }
    }
    pairs
}

impl Tracker {
    pub fn new(cfg: MatcherConfig) -> Self {
        Self {
            cfg,
            noise: KalmanNoise::default(),
            trackers: Vec::new(),
            next_id: 1,
            frame: None,
        }
    }

    pub fn config(&self) -> &MatcherConfig {
        &self.cfg
    }

    pub fn trackers(&self) -> &[TrackerState] {
        &self.trackers
    }

    /// Predict every tracker forward to `frame` and retire the stale ones.
    pub fn advance_to(&mut self, frame: FrameIndex) {
        let steps = match self.frame {
            Some(f) if frame > f => frame - f,
            Some(_) => 0,
            None => 0,
        };
        for _ in 0..steps {
            for t in &mut self.trackers {
                t.filter.predict();
            }
        }
        let max_gap = self.cfg.max_gap;
        self.trackers
            .retain(|t| frame.saturating_sub(t.last_updated) <= max_gap + 1);
        self.frame = Some(frame);
    }

    /// Two-stage association for one frame. Trackers must already be advanced
    /// to `frame`; detections are that frame's detections.
    pub fn associate_frame(&mut self, frame: FrameIndex, dets: &[Detection]) -> FrameAssociation {
        let clusters = cluster_detections(dets, &self.cfg);
        let mut high = clusters.high;
        let mut low = clusters.low;
        order_by_confidence(&mut high);
        order_by_confidence(&mut low);

        let existing = self.trackers.len();
        let mut free = vec![true; existing];
        let mut matched: Vec<(usize, &Detection)> = Vec::new();

        let stage1 = match_stage(&high, &self.trackers, &mut free, &self.cfg);
        let mut high_matched = vec![false; high.len()];
        for (di, ti) in stage1 {
            high_matched[di] = true;
            matched.push((ti, high[di]));
        }
        let stage2 = match_stage(&low, &self.trackers, &mut free, &self.cfg);
        for (di, ti) in stage2 {
            matched.push((ti, low[di]));
        }

        for &(ti, d) in &matched {
            let t = &mut self.trackers[ti];
            t.filter.update(&d.bbox);
            t.last_updated = frame;
            t.hits += 1;
        }

        let mut spawned = Vec::new();
        for (di, d) in high.iter().enumerate() {
            if high_matched[di] {
                continue;
            }
            let id = self.next_id;
            self.next_id += 1;
            self.trackers.push(TrackerState {
                track_id: id,
                identity: d.identity.clone(),
                filter: KalmanBoxFilter::initiate(&d.bbox, self.noise),
                last_updated: frame,
                hits: 1,
            });
            spawned.push(id);
            matched.push((self.trackers.len() - 1, d));
        }

        // one box per identity per frame: keep the most confident
        let mut by_identity: BTreeMap<PlayerId, (f64, u64, TrackedBox)> = BTreeMap::new();
        for (ti, d) in matched {
            let t = &self.trackers[ti];
            let candidate = TrackedBox {
                frame,
                identity: t.identity.clone(),
                bbox: d.bbox,
                source: BoxSource::Detected,
                confidence: d.confidence,
            };
            match by_identity.get(&t.identity) {
                Some((c, id, _)) if (*c, std::cmp::Reverse(*id)) >= (d.confidence, std::cmp::Reverse(t.track_id)) => {}
                _ => {
                    by_identity.insert(t.identity.clone(), (d.confidence, t.track_id, candidate));
                }
            }
        }
        FrameAssociation {
            boxes: by_identity.into_values().map(|(_, _, b)| b).collect(),
            spawned,
        }
    }
}

/// Full offline pass: association, then gap interpolation, then smoothing.
/// Detections must be sorted by frame.
pub fn postprocess(dets: &[Detection], cfg: &MatcherConfig) -> Vec<TrackedBox> {
    let raw = associate_all(dets, cfg);
    let filled = interpolate_gaps(&raw, cfg.max_gap);
    let mut out = smooth(&filled, cfg.smooth_window);
    sort_tracks(&mut out);
    out
}

/// Association only, frame by frame, without interpolation or smoothing.
pub fn associate_all(dets: &[Detection], cfg: &MatcherConfig) -> Vec<TrackedBox> {
    let mut tracker = Tracker::new(*cfg);
    let mut out = Vec::new();
    let mut sorted = dets.to_vec();
    sorted.sort_by_key(|d| d.frame);
    let dets = &sorted[..];
    let (Some(first), Some(last)) = (dets.first(), dets.last()) else {
        return out;
    };
    let mut i = 0;
    for frame in first.frame..=last.frame {
        let start = i;
        while i < dets.len() && dets[i].frame == frame {
            i += 1;
        }
        tracker.advance_to(frame);
        out.extend(tracker.associate_frame(frame, &dets[start..i]).boxes);
    }
    out
}

/// High-cluster detections as tracked boxes: the detector-only baseline.
pub fn high_cluster_only(dets: &[Detection], cfg: &MatcherConfig) -> Vec<TrackedBox> {
    let mut out: Vec<TrackedBox> = dets
        .iter()
        .filter(|d| d.confidence > cfg.t_high)
        .map(|d| TrackedBox {
            frame: d.frame,
            identity: d.identity.clone(),
            bbox: d.bbox,
            source: BoxSource::Detected,
            confidence: d.confidence,
        })
        .collect();
    sort_tracks(&mut out);
    out
}

pub fn sort_tracks(boxes: &mut [TrackedBox]) {
    boxes.sort_by(|a, b| (a.frame, &a.identity).cmp(&(b.frame, &b.identity)));
}

fn by_identity(boxes: &[TrackedBox]) -> BTreeMap<PlayerId, Vec<TrackedBox>> {
    let mut m: BTreeMap<PlayerId, Vec<TrackedBox>> = BTreeMap::new();
    for b in boxes {
        m.entry(b.identity.clone()).or_default().push(b.clone());
    }
    for series in m.values_mut() {
        series.sort_by_key(|b| b.frame);
    }
    m
}

/// Fill per-identity gaps of at most `max_gap` missing frames by linear
/// interpolation of each box attribute.
pub fn interpolate_gaps(boxes: &[TrackedBox], max_gap: u32) -> Vec<TrackedBox> {
    let mut out = Vec::with_capacity(boxes.len());
    for (_, series) in by_identity(boxes) {
        for pair in series.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            out.push(a.clone());
            let missing = b.frame - a.frame - 1;
            if missing == 0 || missing > max_gap {
                continue;
            }
            let span = (b.frame - a.frame) as f64;
            let confidence = a.confidence.min(b.confidence);
            for k in 1..=missing {
                let t = k as f64 / span;
                let lerp = |p: f64, q: f64| p + (q - p) * t;
                out.push(TrackedBox {
                    frame: a.frame + k,
                    identity: a.identity.clone(),
                    bbox: BoundingBox::new(
                        lerp(a.bbox.x, b.bbox.x),
                        lerp(a.bbox.y, b.bbox.y),
                        lerp(a.bbox.w, b.bbox.w),
                        lerp(a.bbox.h, b.bbox.h),
                    ),
                    source: BoxSource::Interpolated,
                    confidence,
                });
            }
        }
        if let Some(last) = series.last() {
            out.push(last.clone());
        }
    }
    sort_tracks(&mut out);
    out
}

/// Centered moving average per attribute over runs of consecutive frames.
///
/// Near the ends of a run the window shrinks symmetrically, so affine motion
/// passes through unchanged.
pub fn smooth(boxes: &[TrackedBox], window: u32) -> Vec<TrackedBox> {
    let half = (window.max(1) as usize - 1) / 2;
    let mut out = Vec::with_capacity(boxes.len());
    for (_, series) in by_identity(boxes) {
        let mut start = 0;
        while start < series.len() {
            let mut end = start + 1;
            while end < series.len() && series[end].frame == series[end - 1].frame + 1 {
                end += 1;
            }
            let run = &series[start..end];
            for (i, b) in run.iter().enumerate() {
                let k = half.min(i).min(run.len() - 1 - i);
                let slice = &run[i - k..=i + k];
                let n = slice.len() as f64;
                let mean = |f: fn(&BoundingBox) -> f64| slice.iter().map(|s| f(&s.bbox)).sum::<f64>() / n;
                let mut sb = b.clone();
                if k > 0 {
                    sb.bbox = BoundingBox::new(mean(|b| b.x), mean(|b| b.y), mean(|b| b.w), mean(|b| b.h));
                }
                out.push(sb);
            }
            start = end;
        }
    }
    out
}

pub fn write_tracks(boxes: &[TrackedBox]) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    for b in boxes {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            b.frame,
            b.identity,
            b.bbox.x,
            b.bbox.y,
            b.bbox.w,
            b.bbox.h,
            b.source.name()
        );
    }
    s
}

#[derive(Debug, Error)]
#[error("tracks line {line}: {message}")]
pub struct TracksParseError {
    pub line: usize,
    pub message: String,
}

/// Parse `tracks.csv`. Confidence is not part of the file and is set to 1.
pub fn parse_tracks(text: &str) -> Result<Vec<TrackedBox>, TracksParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: &str| TracksParseError {
            line: i + 1,
            message: m.to_owned(),
        };
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 7 {
            return Err(err("expected 7 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| err("bad number"));
        let source = match f[6] {
            "detected" => BoxSource::Detected,
            "interpolated" => BoxSource::Interpolated,
            _ => return Err(err("source must be detected|interpolated")),
        };
        out.push(TrackedBox {
            frame: f[0].parse().map_err(|_| err("bad frame"))?,
            identity: PlayerId::new(f[1]),
            bbox: BoundingBox::new(num(f[2])?, num(f[3])?, num(f[4])?, num(f[5])?),
            source,
            confidence: 1.0,
        });
    }
    sort_tracks(&mut out);
    Ok(out)
}
