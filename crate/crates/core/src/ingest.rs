//! Loaders and canonical writers for every external input stream.
//!
//! All text formats are headerless and line oriented. Blank lines and lines
//! starting with `#` are ignored. Loaders validate every record and either
//! return the complete, sorted stream or an error; nothing partial escapes.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BoundingBox, Point};

pub type FrameIndex = u32;

/// Court length along the baseline-to-baseline axis, feet.
pub const COURT_LENGTH_FT: f64 = 94.0;
/// Court width, feet.
pub const COURT_WIDTH_FT: f64 = 50.0;
/// Default tolerance for tracking samples outside the painted court.
pub const DEFAULT_OUT_OF_BOUNDS_MARGIN_FT: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub String);

impl PlayerId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PlayerId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TeamId(pub String);

impl fmt::Display for TeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TeamId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionId(pub String);

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for RegionId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: invalid {field}: {message}")]
    Validation {
        line: u64,
        field: &'static str,
        message: String,
    },
}

impl IngestError {
    fn parse(line: u64, message: impl Into<String>) -> Self {
        Self::Parse {
            line,
            message: message.into(),
        }
    }

    fn invalid(line: u64, field: &'static str, message: impl Into<String>) -> Self {
        Self::Validation {
            line,
            field,
            message: message.into(),
        }
    }

    /// Validation-class errors (bad content) as opposed to I/O failures.
    pub fn is_validation(&self) -> bool {
        !matches!(self, IngestError::Io { .. })
    }
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Non-comment, non-blank lines as (1-based line number, trimmed fields).
fn csv_records(text: &str) -> Result<Vec<(u64, Vec<String>)>> {
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i as u64 + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(n, l)| (n, l.split(',').map(|f| f.trim().to_owned()).collect()))
        .collect())
}

fn expect_fields(line: u64, fields: &[String], allowed: &[usize]) -> Result<()> {
    if allowed.contains(&fields.len()) {
        Ok(())
    } else {
        Err(IngestError::parse(
            line,
            format!("expected {:?} fields, found {}", allowed, fields.len()),
        ))
    }
}

fn parse_f64(line: u64, field: &'static str, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| IngestError::parse(line, format!("{field}: not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(IngestError::invalid(line, field, "must be finite"));
    }
    Ok(v)
}

fn parse_u32(line: u64, field: &'static str, s: &str) -> Result<u32> {
    s.parse()
        .map_err(|_| IngestError::parse(line, format!("{field}: not an unsigned integer: {s:?}")))
}

fn parse_id(line: u64, field: &'static str, s: &str) -> Result<String> {
    if s.is_empty() {
        return Err(IngestError::invalid(line, field, "empty identifier"));
    }
    if s.contains([',', ';', ' ']) {
        return Err(IngestError::invalid(line, field, "identifier contains a separator"));
    }
    Ok(s.to_owned())
}

// ---------------------------------------------------------------------------
// Detections

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub frame: FrameIndex,
    pub bbox: BoundingBox,
    pub identity: PlayerId,
    pub confidence: f64,
}

impl Detection {
    pub fn new(frame: FrameIndex, identity: impl Into<String>, bbox: BoundingBox, confidence: f64) -> Self {
        Self {
            frame,
            bbox,
            identity: PlayerId(identity.into()),
            confidence,
        }
    }
}

pub fn parse_detections(text: &str) -> Result<Vec<Detection>> {
    let mut out = Vec::new();
    for (line, f) in csv_records(text)? {
        expect_fields(line, &f, &[7])?;
        let frame = parse_u32(line, "frame", &f[0])?;
        let identity = PlayerId(parse_id(line, "identity", &f[1])?);
        let bbox = BoundingBox::new(
            parse_f64(line, "x", &f[2])?,
            parse_f64(line, "y", &f[3])?,
            parse_f64(line, "w", &f[4])?,
            parse_f64(line, "h", &f[5])?,
        );
        let confidence = parse_f64(line, "confidence", &f[6])?;
        if bbox.w <= 0.0 {
            return Err(IngestError::invalid(line, "w", "must be positive"));
        }
        if bbox.h <= 0.0 {
            return Err(IngestError::invalid(line, "h", "must be positive"));
        }
        if !(0.0..=1.0).contains(&confidence) {
            return Err(IngestError::invalid(line, "confidence", format!("{confidence} not in [0,1]")));
        }
        out.push(Detection {
            frame,
            bbox,
            identity,
            confidence,
        });
    }
    sort_detections(&mut out);
    Ok(out)
}

pub fn sort_detections(dets: &mut [Detection]) {
    dets.sort_by(|a, b| (a.frame, &a.identity).cmp(&(b.frame, &b.identity)));
}

pub fn load_detections(path: impl AsRef<Path>) -> Result<Vec<Detection>> {
    parse_detections(&read_file(path.as_ref())?)
}

pub fn write_detections(dets: &[Detection]) -> String {
    let mut s = String::new();
    for d in dets {
        let b = d.bbox;
        let _ = writeln!(s, "{},{},{},{},{},{},{}", d.frame, d.identity, b.x, b.y, b.w, b.h, d.confidence);
    }
    s
}

/// Check that every detection identity appears in the roster.
pub fn check_identities(dets: &[Detection], roster: &Roster) -> std::result::Result<(), PlayerId> {
    match dets.iter().find(|d| !roster.contains(&d.identity)) {
        Some(d) => Err(d.identity.clone()),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------------------
// Court tracking

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Entity {
    Ball,
    Player(PlayerId),
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entity::Ball => f.write_str("BALL"),
            Entity::Player(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CourtSample {
    pub frame: FrameIndex,
    pub entity: Entity,
    /// Court feet: x along the baseline-to-baseline axis, y across.
    pub position: Point,
    /// Ball height in feet, when the source provides it.
    pub height: Option<f64>,
}

pub fn parse_tracking(text: &str, margin_ft: f64) -> Result<Vec<CourtSample>> {
    let mut out = Vec::new();
    for (line, f) in csv_records(text)? {
        expect_fields(line, &f, &[4, 5])?;
        let frame = parse_u32(line, "frame", &f[0])?;
        let entity = match f[1].as_str() {
            "BALL" => Entity::Ball,
            other => Entity::Player(PlayerId(parse_id(line, "entity", other)?)),
        };
        let x = parse_f64(line, "x_ft", &f[2])?;
        let y = parse_f64(line, "y_ft", &f[3])?;
        if x < -margin_ft || x > COURT_LENGTH_FT + margin_ft {
            return Err(IngestError::invalid(line, "x_ft", format!("{x} outside court")));
        }
        if y < -margin_ft || y > COURT_WIDTH_FT + margin_ft {
            return Err(IngestError::invalid(line, "y_ft", format!("{y} outside court")));
        }
        let height = match f.get(4) {
            Some(z) if !z.is_empty() => {
                if entity != Entity::Ball {
                    return Err(IngestError::invalid(line, "z_ft", "height only applies to the ball"));
                }
                Some(parse_f64(line, "z_ft", z)?)
            }
            _ => None,
        };
        out.push(CourtSample {
            frame,
            entity,
            position: Point::new(x, y),
            height,
        });
    }
    out.sort_by(|a, b| (a.frame, &a.entity).cmp(&(b.frame, &b.entity)));
    Ok(out)
}

pub fn load_tracking(path: impl AsRef<Path>) -> Result<Vec<CourtSample>> {
    parse_tracking(&read_file(path.as_ref())?, DEFAULT_OUT_OF_BOUNDS_MARGIN_FT)
}

pub fn write_tracking(samples: &[CourtSample]) -> String {
    let mut s = String::new();
    for c in samples {
        let _ = write!(s, "{},{},{},{}", c.frame, c.entity, c.position.x, c.position.y);
        if let Some(z) = c.height {
            let _ = write!(s, ",{z}");
        }
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------------------
// Segmentation masks

/// Run-length encoded binary mask. Runs alternate background/foreground in
/// row-major order, starting with a (possibly zero) background run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentationMask {
    pub frame: FrameIndex,
    pub width: u32,
    pub height: u32,
    pub runs: Vec<u32>,
}

impl SegmentationMask {
    /// Encode a row-major bitmap (`true` = human foreground).
    pub fn from_bitmap(frame: FrameIndex, width: u32, height: u32, pixels: &[bool]) -> Self {
        assert_eq!(pixels.len(), width as usize * height as usize);
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0u32;
        for &p in pixels {
            if p == current {
                len += 1;
            } else {
                runs.push(len);
                current = p;
                len = 1;
            }
        }
        runs.push(len);
        Self {
            frame,
            width,
            height,
            runs,
        }
    }

    pub fn to_bitmap(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.width as usize * self.height as usize);
        let mut value = false;
        for &r in &self.runs {
            out.extend(std::iter::repeat_n(value, r as usize));
            value = !value;
        }
        out
    }

    pub fn foreground_count(&self) -> u64 {
        self.runs.iter().skip(1).step_by(2).map(|&r| r as u64).sum()
    }
}

pub fn parse_masks(text: &str) -> Result<Vec<SegmentationMask>> {
    let mut out = Vec::new();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i as u64 + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    while let Some((line, header)) = lines.next() {
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(IngestError::parse(line, "mask header must be `frame width height`"));
        }
        let frame = parse_u32(line, "frame", parts[0])?;
        let width = parse_u32(line, "width", parts[1])?;
        let height = parse_u32(line, "height", parts[2])?;
        let (rline, runs_text) = lines
            .next()
            .ok_or_else(|| IngestError::parse(line, "mask header without run lengths"))?;
        let runs = runs_text
            .split_whitespace()
            .map(|r| parse_u32(rline, "run", r))
            .collect::<Result<Vec<_>>>()?;
        let total: u64 = runs.iter().map(|&r| r as u64).sum();
        let expected = width as u64 * height as u64;
        if total != expected {
            return Err(IngestError::invalid(
                rline,
                "runs",
                format!("run lengths sum to {total}, expected {expected}"),
            ));
        }
        out.push(SegmentationMask {
            frame,
            width,
            height,
            runs,
        });
    }
    out.sort_by_key(|m| m.frame);
    Ok(out)
}

pub fn load_masks(path: impl AsRef<Path>) -> Result<Vec<SegmentationMask>> {
    parse_masks(&read_file(path.as_ref())?)
}

pub fn write_masks(masks: &[SegmentationMask]) -> String {
    let mut s = String::new();
    for m in masks {
        let _ = writeln!(s, "{} {} {}", m.frame, m.width, m.height);
        let runs: Vec<String> = m.runs.iter().map(u32::to_string).collect();
        s.push_str(&runs.join(" "));
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------------------
// Pose keypoints

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Joint {
    Head,
    LeftHand,
    RightHand,
    Hip,
    LeftFoot,
    RightFoot,
}

impl Joint {
    pub const ALL: [Joint; 6] = [
        Joint::Head,
        Joint::LeftHand,
        Joint::RightHand,
        Joint::Hip,
        Joint::LeftFoot,
        Joint::RightFoot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Joint::Head => "head",
            Joint::LeftHand => "left_hand",
            Joint::RightHand => "right_hand",
            Joint::Hip => "hip",
            Joint::LeftFoot => "left_foot",
            Joint::RightFoot => "right_foot",
        }
    }

    pub fn from_name(s: &str) -> Option<Joint> {
        Joint::ALL.into_iter().find(|j| j.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub point: Point,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseKeypoints {
    pub frame: FrameIndex,
    pub player: PlayerId,
    pub joints: BTreeMap<Joint, Keypoint>,
}

pub fn parse_keypoints(text: &str) -> Result<Vec<PoseKeypoints>> {
    let mut grouped: BTreeMap<(FrameIndex, PlayerId), BTreeMap<Joint, Keypoint>> = BTreeMap::new();
    for (line, f) in csv_records(text)? {
        expect_fields(line, &f, &[6])?;
        let frame = parse_u32(line, "frame", &f[0])?;
        let player = PlayerId(parse_id(line, "player", &f[1])?);
        let joint = Joint::from_name(&f[2])
            .ok_or_else(|| IngestError::invalid(line, "joint", format!("unknown joint {:?}", f[2])))?;
        let point = Point::new(parse_f64(line, "x", &f[3])?, parse_f64(line, "y", &f[4])?);
        let confidence = parse_f64(line, "confidence", &f[5])?;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(IngestError::invalid(line, "confidence", format!("{confidence} not in [0,1]")));
        }
        let joints = grouped.entry((frame, player)).or_default();
        if joints.insert(joint, Keypoint { point, confidence }).is_some() {
            return Err(IngestError::invalid(line, "joint", "duplicate joint for player and frame"));
        }
    }
    Ok(grouped
        .into_iter()
        .map(|((frame, player), joints)| PoseKeypoints { frame, player, joints })
        .collect())
}

pub fn load_keypoints(path: impl AsRef<Path>) -> Result<Vec<PoseKeypoints>> {
    parse_keypoints(&read_file(path.as_ref())?)
}

pub fn write_keypoints(poses: &[PoseKeypoints]) -> String {
    let mut s = String::new();
    for p in poses {
        for (j, k) in &p.joints {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                p.frame,
                p.player,
                j.name(),
                k.point.x,
                k.point.y,
                k.confidence
            );
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Shots and defense

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub player: PlayerId,
    pub position: Point,
    pub made: bool,
    pub points: u8,
}

pub fn parse_shots(text: &str) -> Result<Vec<ShotRecord>> {
    let mut out = Vec::new();
    for (line, f) in csv_records(text)? {
        expect_fields(line, &f, &[5])?;
        let player = PlayerId(parse_id(line, "player", &f[0])?);
        let x = parse_f64(line, "x_ft", &f[1])?;
        let y = parse_f64(line, "y_ft", &f[2])?;
        if !(0.0..=COURT_LENGTH_FT).contains(&x) {
            return Err(IngestError::invalid(line, "x_ft", format!("{x} outside court")));
        }
        if !(0.0..=COURT_WIDTH_FT).contains(&y) {
            return Err(IngestError::invalid(line, "y_ft", format!("{y} outside court")));
        }
        let made = match f[3].as_str() {
            "0" => false,
            "1" => true,
            other => return Err(IngestError::invalid(line, "made", format!("expected 0 or 1, got {other:?}"))),
        };
        let points = match f[4].as_str() {
            "2" => 2,
            "3" => 3,
            other => return Err(IngestError::invalid(line, "points", format!("expected 2 or 3, got {other:?}"))),
        };
        out.push(ShotRecord {
            player,
            position: Point::new(x, y),
            made,
            points,
        });
    }
    Ok(out)
}

pub fn load_shots(path: impl AsRef<Path>) -> Result<Vec<ShotRecord>> {
    parse_shots(&read_file(path.as_ref())?)
}

pub fn write_shots(shots: &[ShotRecord]) -> String {
    let mut s = String::new();
    for r in shots {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.player, r.position.x, r.position.y, r.made as u8, r.points
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefenseRecord {
    pub player: PlayerId,
    pub region: RegionId,
    pub diff_percent: f64,
}

pub fn parse_defense(text: &str) -> Result<Vec<DefenseRecord>> {
    let mut out = Vec::new();
    for (line, f) in csv_records(text)? {
        expect_fields(line, &f, &[3])?;
        let player = PlayerId(parse_id(line, "player", &f[0])?);
        let region = RegionId(parse_id(line, "region", &f[1])?);
        let diff_percent = parse_f64(line, "diff_percent", &f[2])?;
        if !(-100.0..=100.0).contains(&diff_percent) {
            return Err(IngestError::invalid(line, "diff_percent", format!("{diff_percent} not in [-100,100]")));
        }
        out.push(DefenseRecord {
            player,
            region,
            diff_percent,
        });
    }
    out.sort_by(|a, b| (&a.player, &a.region).cmp(&(&b.player, &b.region)));
    Ok(out)
}

pub fn load_defense(path: impl AsRef<Path>) -> Result<Vec<DefenseRecord>> {
    parse_defense(&read_file(path.as_ref())?)
}

pub fn write_defense(records: &[DefenseRecord]) -> String {
    let mut s = String::new();
    for r in records {
        let _ = writeln!(s, "{},{},{}", r.player, r.region, r.diff_percent);
    }
    s
}

// ---------------------------------------------------------------------------
// Roster

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StarRole {
    #[default]
    None,
    Shooter,
    Defender,
}

impl StarRole {
    pub fn name(self) -> &'static str {
        match self {
            StarRole::None => "none",
            StarRole::Shooter => "shooter",
            StarRole::Defender => "defender",
        }
    }

    pub fn is_star(self) -> bool {
        self != StarRole::None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub name: String,
    pub team: TeamId,
    pub role: StarRole,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roster {
    players: BTreeMap<PlayerId, RosterEntry>,
}

impl Roster {
    pub fn insert(&mut self, id: PlayerId, entry: RosterEntry) -> Option<RosterEntry> {
        self.players.insert(id, entry)
    }

    pub fn get(&self, id: &PlayerId) -> Option<&RosterEntry> {
        self.players.get(id)
    }

    pub fn contains(&self, id: &PlayerId) -> bool {
        self.players.contains_key(id)
    }

    pub fn team_of(&self, id: &PlayerId) -> Option<&TeamId> {
        self.players.get(id).map(|e| &e.team)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PlayerId, &RosterEntry)> {
        self.players.iter()
    }

    pub fn len(&self) -> usize {
        self.players.len()
    }

    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
    }

    /// Distinct teams in ascending order.
    pub fn teams(&self) -> Vec<TeamId> {
        let mut t: Vec<TeamId> = self.players.values().map(|e| e.team.clone()).collect();
        t.sort();
        t.dedup();
        t
    }
}

pub fn parse_roster(text: &str) -> Result<Roster> {
    let mut roster = Roster::default();
    for (line, f) in csv_records(text)? {
        expect_fields(line, &f, &[4])?;
        let id = PlayerId(parse_id(line, "player", &f[0])?);
        if f[1].is_empty() {
            return Err(IngestError::invalid(line, "name", "empty name"));
        }
        let team = TeamId(parse_id(line, "team", &f[2])?);
        let role = match f[3].as_str() {
            "none" => StarRole::None,
            "shooter" => StarRole::Shooter,
            "defender" => StarRole::Defender,
            other => return Err(IngestError::invalid(line, "role", format!("unknown role {other:?}"))),
        };
        let entry = RosterEntry {
            name: f[1].clone(),
            team,
            role,
        };
        if roster.insert(id, entry).is_some() {
            return Err(IngestError::invalid(line, "player", "duplicate player id"));
        }
    }
    Ok(roster)
}

pub fn load_roster(path: impl AsRef<Path>) -> Result<Roster> {
    parse_roster(&read_file(path.as_ref())?)
}

pub fn write_roster(roster: &Roster) -> String {
    let mut s = String::new();
    for (id, e) in roster.iter() {
        let _ = writeln!(s, "{},{},{},{}", id, e.name, e.team, e.role.name());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_detection_line() {
        let d = parse_detections("0,G30,10.5,20.0,40.0,80.0,0.91\n").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].frame, 0);
        assert_eq!(d[0].identity.as_str(), "G30");
        assert_eq!(d[0].bbox, BoundingBox::new(10.5, 20.0, 40.0, 80.0));
        assert_eq!(d[0].confidence, 0.91);
    }

    #[test]
    fn empty_detection_file() {
        assert!(parse_detections("").unwrap().is_empty());
    }

    #[test]
    fn confidence_out_of_range_names_field() {
        let err = parse_detections("0,G30,1,1,1,1,0.5\n1,G30,10.5,20.0,40.0,80.0,1.2\n").unwrap_err();
        match err {
            IngestError::Validation { line, field, .. } => {
                assert_eq!(line, 2);
                assert_eq!(field, "confidence");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_detections("0,G30,1,1,1,1,0.5\n\n# c\n3,G30,abc,1,1,1,0.5\n").unwrap_err();
        match err {
            IngestError::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detections_sorted_by_frame_then_identity() {
        let d = parse_detections("2,B,0,0,1,1,0.5\n0,Z,0,0,1,1,0.5\n0,A,0,0,1,1,0.5\n").unwrap();
        let keys: Vec<_> = d.iter().map(|d| (d.frame, d.identity.as_str())).collect();
        assert_eq!(keys, vec![(0, "A"), (0, "Z"), (2, "B")]);
    }

    #[test]
    fn mask_runs_must_cover_frame() {
        let ok = "0 20 10\n100 50 50\n";
        let m = parse_masks(ok).unwrap();
        assert_eq!(m[0].foreground_count(), 50);
        let bad = "0 20 10\n100 50 49\n";
        assert!(matches!(
            parse_masks(bad),
            Err(IngestError::Validation { field: "runs", .. })
        ));
    }

    #[test]
    fn shot_with_one_point_rejected() {
        assert!(matches!(
            parse_shots("P1,20,25,1,1\n"),
            Err(IngestError::Validation { field: "points", .. })
        ));
        assert_eq!(parse_shots("P1,20,25,1,3\n").unwrap()[0].points, 3);
    }

    #[test]
    fn tracking_with_ball_height_and_bounds() {
        let t = parse_tracking("0,BALL,10,20,8.5\n0,P1,12,20\n", 6.0).unwrap();
        assert_eq!(t[0].entity, Entity::Ball);
        assert_eq!(t[0].height, Some(8.5));
        assert!(parse_tracking("0,P1,120,20\n", 6.0).is_err());
        assert!(parse_tracking("0,P1,10,20,3\n", 6.0).is_err());
    }

    #[test]
    fn roster_rejects_duplicates_and_unknown_roles() {
        assert!(parse_roster("P1,Ann,A,none\nP1,Bea,B,none\n").is_err());
        assert!(parse_roster("P1,Ann,A,captain\n").is_err());
        let r = parse_roster("P1,Ann,A,shooter\nP2,Bea,B,none\n").unwrap();
        assert_eq!(r.get(&"P1".into()).unwrap().role, StarRole::Shooter);
        assert_eq!(r.teams(), vec![TeamId::from("A"), TeamId::from("B")]);
    }

    #[test]
    fn defense_bounds() {
        assert!(parse_defense("P1,paint,-3.6\n").is_ok());
        assert!(parse_defense("P1,paint,-130\n").is_err());
    }

    #[test]
    fn keypoints_group_by_player_frame() {
        let k = parse_keypoints("0,P1,left_foot,100,400,0.9\n0,P1,right_foot,120,400,0.8\n1,P1,head,5,5,0.7\n")
            .unwrap();
        assert_eq!(k.len(), 2);
        assert_eq!(k[0].joints.len(), 2);
        assert!(parse_keypoints("0,P1,elbow,1,1,0.5\n").is_err());
        assert!(parse_keypoints("0,P1,head,1,1,1.5\n").is_err());
    }

    fn arb_detection() -> impl Strategy<Value = Detection> {
        (0u32..50, "[A-Z][0-9]{1,2}", 0.0..500.0f64, 0.0..500.0f64, 0.5..80.0f64, 0.5..200.0f64, 0.0..=1.0f64)
            .prop_map(|(frame, id, x, y, w, h, c)| Detection::new(frame, id, BoundingBox::new(x, y, w, h), c))
    }

    proptest! {
        #[test]
        fn detections_canonical_round_trip(mut dets in proptest::collection::vec(arb_detection(), 0..30)) {
            sort_detections(&mut dets);
            let text = write_detections(&dets);
            let loaded = parse_detections(&text).unwrap();
            prop_assert_eq!(write_detections(&loaded), text);
        }

        #[test]
        fn mask_bitmap_round_trip(bits in proptest::collection::vec(any::<bool>(), 1..200)) {
            let w = bits.len() as u32;
            let m = SegmentationMask::from_bitmap(3, w, 1, &bits);
            let text = write_masks(std::slice::from_ref(&m));
            let back = parse_masks(&text).unwrap();
            prop_assert_eq!(&back[0], &m);
            prop_assert_eq!(back[0].to_bitmap(), bits);
        }
    }
}
